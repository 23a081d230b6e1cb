//! Quantitative degrees of forward- and backward-looking responsibility of
//! agent groups in multi-agent decision trees with probabilistic uncertainty
//! and ambiguity.
//!
//! The crate provides:
//!
//! * [`tree`] — the validated tree model and navigation primitives,
//! * [`io`] — the textual tree DSL, canonical serializer and DOT export,
//! * [`strategy`] — strategy/scenario enumeration, prospects and likelihoods,
//! * [`resp`] — the benchmark variant 0, variants 1–4 (forward and backward)
//!   and the NESS variant, with all intermediate quantities,
//! * [`transforms`] — tree-to-tree transformations used by the independence
//!   and monotonicity axioms,
//! * [`axioms`] — executable axiom checks, random falsification and the
//!   compliance matrix,
//! * [`scenarios`] — canonical builders for the paradigmatic examples and
//!   voting methods, closed-form values and the cross-check driver.

pub mod axioms;
pub mod engine;
pub mod io;
pub mod rat;
pub mod resp;
pub mod scenarios;
pub mod strategy;
pub mod transforms;
pub mod tree;

pub use rat::Rat;
pub use tree::{ActionLabel, AgentId, DecisionTree, Event, Group, InfoSetId, NodeId, NodeKind, TreeSpec};
