//! Canonical builders for the paradigmatic example trees and the voting
//! methods, closed-form responsibility values, and the grid cross-check
//! driver that compares tree evaluation against the closed forms.

mod paradigms;
mod table2;
mod voting;

pub use paradigms::{build_paradigmatic, ParadigmId};
pub use table2::{verify_table2, CellKey, Table2Report, Table2Row};
pub use voting::{build_voting_tree, closed_form, MethodId, Round, VotingError, VotingParams};
