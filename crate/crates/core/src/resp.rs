//! Responsibility functions: the strict-causation benchmark (variant 0),
//! variants 1–4 in forward and backward form, and the NESS variant.
//!
//! Backward values are sums of per-decision summands along the outcome's
//! history; forward values are extrema over the actions available at the
//! queried decision node. All intermediate quantities (guaranteed
//! likelihood, minimax likelihood, scenario optima, risks) are exposed both
//! as standalone operations and inside the returned report.

use std::collections::BTreeMap;
use std::fmt;

use crate::engine::Evaluator;
use crate::rat::{indicator, zero, Rat};
use crate::strategy::{enumerate_scenarios, Scenario, Strategy};
use crate::tree::{ActionLabel, DecisionTree, Event, Group, NodeId, NodeKind, TreeError};

/// Which responsibility function family is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VariantId {
    V0,
    V1,
    V2,
    V3,
    V4,
    Ness,
}

impl VariantId {
    pub const ALL: [VariantId; 6] = [
        VariantId::V0,
        VariantId::V1,
        VariantId::V2,
        VariantId::V3,
        VariantId::V4,
        VariantId::Ness,
    ];
    /// The graded variants 1–4.
    pub const GRADED: [VariantId; 4] = [VariantId::V1, VariantId::V2, VariantId::V3, VariantId::V4];

    pub fn supports_forward(self) -> bool {
        matches!(self, VariantId::V1 | VariantId::V2 | VariantId::V3 | VariantId::V4)
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VariantId::V0 => "0",
            VariantId::V1 => "1",
            VariantId::V2 => "2",
            VariantId::V3 => "3",
            VariantId::V4 => "4",
            VariantId::Ness => "ness",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

/// Result of one responsibility query with its intermediate quantities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponsibilityReport {
    pub variant: VariantId,
    pub direction: Direction,
    pub node: NodeId,
    pub value: Rat,
    /// Backward queries: the summand contributed by each of the group's
    /// decision nodes on the history.
    pub per_decision_summands: BTreeMap<NodeId, Rat>,
    /// Named intermediate quantities actually used by the computation.
    pub intermediates: BTreeMap<String, Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RespError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("`{0}` is not an outcome node")]
    NotOutcome(NodeId),
    #[error("`{0}` is not a decision node of the group")]
    NotGroupDecision(NodeId),
    #[error("variant {0} has no forward function")]
    NoForward(VariantId),
    #[error("the NESS variant requires an outcome inside the event, got `{0}`")]
    OutcomeNotInEvent(NodeId),
    #[error("event member `{0}` is not an outcome node")]
    EventNotOutcome(NodeId),
}

fn check_event(tree: &DecisionTree, event: &Event) -> Result<(), RespError> {
    for n in &event.0 {
        if !matches!(tree.kind(n)?, NodeKind::Outcome) {
            return Err(RespError::EventNotOutcome(n.clone()));
        }
    }
    Ok(())
}

/// Guaranteed likelihood of the event at `v` (minimum over strategies and
/// plain scenarios).
pub fn gamma(tree: &DecisionTree, event: &Event, group: &Group, v: &NodeId) -> Result<Rat, RespError> {
    check_event(tree, event)?;
    Ok(Evaluator::new(tree, group, event).gamma(v)?)
}

/// Worst-case likelihood of a strategy over info-aware scenarios.
pub fn worst_case(
    tree: &DecisionTree,
    event: &Event,
    group: &Group,
    v: &NodeId,
    strategy: &Strategy,
) -> Result<Rat, RespError> {
    check_event(tree, event)?;
    Ok(Evaluator::new(tree, group, event).lambda(v, strategy)?)
}

/// Smallest achievable worst-case likelihood at `v`.
pub fn minimax(tree: &DecisionTree, event: &Event, group: &Group, v: &NodeId) -> Result<Rat, RespError> {
    check_event(tree, event)?;
    Ok(Evaluator::new(tree, group, event).mu(v)?)
}

/// Optimum the group could achieve for avoiding the event in a scenario.
pub fn optimum(
    tree: &DecisionTree,
    event: &Event,
    group: &Group,
    _v: &NodeId,
    scenario: &Scenario,
) -> Result<Rat, RespError> {
    check_event(tree, event)?;
    Ok(Evaluator::new(tree, group, event).omega(scenario)?)
}

/// Risk taken by choosing `action` at `v_d`.
pub fn risk(
    tree: &DecisionTree,
    event: &Event,
    group: &Group,
    v_d: &NodeId,
    action: &ActionLabel,
) -> Result<Rat, RespError> {
    check_event(tree, event)?;
    require_group_decision(tree, group, v_d)?;
    Ok(Evaluator::new(tree, group, event).rho(v_d, action)?)
}

/// Minimal risk and the risk-minimizing action set at `v_d`.
pub fn min_risk(
    tree: &DecisionTree,
    event: &Event,
    group: &Group,
    v_d: &NodeId,
) -> Result<(Rat, Vec<ActionLabel>), RespError> {
    check_event(tree, event)?;
    require_group_decision(tree, group, v_d)?;
    Ok(Evaluator::new(tree, group, event).min_risk(v_d)?)
}

fn require_group_decision(tree: &DecisionTree, group: &Group, v: &NodeId) -> Result<(), RespError> {
    match tree.kind(v)? {
        NodeKind::Decision { agent, .. } if group.contains(agent) => Ok(()),
        _ => Err(RespError::NotGroupDecision(v.clone())),
    }
}

fn require_outcome(tree: &DecisionTree, v: &NodeId) -> Result<(), RespError> {
    if matches!(tree.kind(v)?, NodeKind::Outcome) {
        Ok(())
    } else {
        Err(RespError::NotOutcome(v.clone()))
    }
}

/// Strict-causation benchmark: 1 iff some node on the history made the event
/// certain while its predecessor, a group decision node, had not.
pub fn rb0(tree: &DecisionTree, event: &Event, group: &Group, v_o: &NodeId) -> Result<Rat, RespError> {
    check_event(tree, event)?;
    require_outcome(tree, v_o)?;
    let certain = |n: &NodeId| -> Result<bool, RespError> {
        Ok(tree
            .branch(n, false)?
            .iter()
            .filter(|m| matches!(tree.kind(m).unwrap(), NodeKind::Outcome))
            .all(|m| event.contains(m)))
    };
    let hist = tree.history(v_o)?;
    for (pos, v) in hist.iter().enumerate() {
        if pos == 0 {
            continue;
        }
        let pred = &hist[pos - 1];
        let pred_in_group = match tree.kind(pred)? {
            NodeKind::Decision { agent, .. } => group.contains(agent),
            _ => false,
        };
        if pred_in_group && certain(v)? && !certain(pred)? {
            return Ok(indicator(true));
        }
    }
    Ok(indicator(false))
}

/// Maximum caused increase in a quantity over the actions at `v_d`, where
/// the per-action increase takes the worst node of the information set.
fn info_max_successor<'t>(
    tree: &'t DecisionTree,
    v_d: &NodeId,
    action: &ActionLabel,
) -> Result<Vec<NodeId>, RespError> {
    let ix = tree.ix(v_d)?;
    let mates = tree.info_mates(ix);
    let mut out = Vec::new();
    for m in mates {
        let succ = tree
            .actions_of(m)
            .iter()
            .find(|(l, _)| l == action)
            .map(|(_, s)| s.clone())
            .expect("action lists agree across an information set");
        out.push(succ);
    }
    Ok(out)
}

/// Shared machinery for the graded variants, caching risks across queries so
/// that grid verification over thousands of outcomes stays cheap.
pub(crate) struct VariantCalc<'a> {
    tree: &'a DecisionTree,
    eval: Evaluator<'a>,
    rho_cache: std::cell::RefCell<BTreeMap<(NodeId, ActionLabel), Rat>>,
    min_risk_cache: std::cell::RefCell<BTreeMap<NodeId, Rat>>,
}

impl<'a> VariantCalc<'a> {
    pub(crate) fn new(tree: &'a DecisionTree, group: &'a Group, event: &'a Event) -> Self {
        VariantCalc {
            tree,
            eval: Evaluator::new(tree, group, event),
            rho_cache: Default::default(),
            min_risk_cache: Default::default(),
        }
    }

    fn rho(&self, v_d: &NodeId, action: &ActionLabel) -> Result<Rat, RespError> {
        let key = (v_d.clone(), action.clone());
        if let Some(r) = self.rho_cache.borrow().get(&key) {
            return Ok(r.clone());
        }
        let r = self.eval.rho(v_d, action)?;
        self.rho_cache.borrow_mut().insert(key, r.clone());
        Ok(r)
    }

    fn min_risk_value(&self, v_d: &NodeId) -> Result<Rat, RespError> {
        if let Some(r) = self.min_risk_cache.borrow().get(v_d) {
            return Ok(r.clone());
        }
        let mut lo: Option<Rat> = None;
        for (a, _) in self.tree.actions_of(self.tree.ix(v_d)?) {
            let r = self.rho(v_d, a)?;
            if lo.as_ref().map(|l| &r < l).unwrap_or(true) {
                lo = Some(r);
            }
        }
        let lo = lo.expect("decision node has actions");
        self.min_risk_cache.borrow_mut().insert(v_d.clone(), lo.clone());
        Ok(lo)
    }

    /// Per-decision backward summand for a graded variant.
    pub(crate) fn summand(
        &self,
        variant: VariantId,
        v_d: &NodeId,
        action: &ActionLabel,
        notes: &mut BTreeMap<String, Rat>,
    ) -> Result<Rat, RespError> {
        let succ = self
            .tree
            .actions_of(self.tree.ix(v_d)?)
            .iter()
            .find(|(l, _)| l == action)
            .map(|(_, s)| s.clone())
            .expect("taken action exists");
        match variant {
            VariantId::V1 => {
                let here = self.eval.gamma(v_d)?;
                let there = self.eval.gamma(&succ)?;
                notes.insert(format!("gamma({v_d})"), here.clone());
                notes.insert(format!("gamma({succ})"), there.clone());
                Ok(there - here)
            }
            VariantId::V2 => {
                let here = self.eval.mu(v_d)?;
                notes.insert(format!("mu({v_d})"), here.clone());
                let mut worst: Option<Rat> = None;
                for s in info_max_successor(self.tree, v_d, action)? {
                    let val = self.eval.mu(&s)?;
                    notes.insert(format!("mu({s})"), val.clone());
                    if worst.as_ref().map(|w| &val > w).unwrap_or(true) {
                        worst = Some(val);
                    }
                }
                Ok(worst.expect("info set nonempty") - here)
            }
            VariantId::V3 => {
                let r = self.rho(v_d, action)?;
                notes.insert(format!("rho({v_d},{action})"), r.clone());
                Ok(r)
            }
            VariantId::V4 => {
                let r = self.rho(v_d, action)?;
                let lo = self.min_risk_value(v_d)?;
                notes.insert(format!("rho({v_d},{action})"), r.clone());
                notes.insert(format!("rho_min({v_d})"), lo.clone());
                Ok(r - lo)
            }
            VariantId::V0 | VariantId::Ness => unreachable!("graded variants only"),
        }
    }

    pub(crate) fn forward(
        &self,
        variant: VariantId,
        v_d: &NodeId,
        notes: &mut BTreeMap<String, Rat>,
    ) -> Result<Rat, RespError> {
        let actions: Vec<ActionLabel> = self
            .tree
            .actions_of(self.tree.ix(v_d)?)
            .iter()
            .map(|(l, _)| l.clone())
            .collect();
        match variant {
            VariantId::V1 | VariantId::V2 => {
                let mut best: Option<Rat> = None;
                for a in &actions {
                    let d = self.summand(variant, v_d, a, notes)?;
                    if best.as_ref().map(|b| &d > b).unwrap_or(true) {
                        best = Some(d);
                    }
                }
                Ok(best.expect("decision node has actions"))
            }
            VariantId::V3 => {
                let r = self.eval.influence(v_d)?;
                notes.insert(format!("delta_ell_max({v_d})"), r.clone());
                Ok(r)
            }
            VariantId::V4 => {
                let lo = self.min_risk_value(v_d)?;
                notes.insert(format!("rho_min({v_d})"), lo.clone());
                let mut hi: Option<Rat> = None;
                for a in &actions {
                    let r = self.rho(v_d, a)?;
                    notes.insert(format!("rho({v_d},{a})"), r.clone());
                    if hi.as_ref().map(|h| &r > h).unwrap_or(true) {
                        hi = Some(r);
                    }
                }
                Ok(hi.expect("decision node has actions") - lo)
            }
            VariantId::V0 | VariantId::Ness => unreachable!("graded variants only"),
        }
    }
}

/// Backward responsibility for variants 1–4 with the per-decision summands.
pub fn rb_graded(
    tree: &DecisionTree,
    event: &Event,
    group: &Group,
    variant: VariantId,
    v_o: &NodeId,
) -> Result<ResponsibilityReport, RespError> {
    check_event(tree, event)?;
    require_outcome(tree, v_o)?;
    let m = VariantCalc::new(tree, group, event);
    let mut notes = BTreeMap::new();
    let mut summands = BTreeMap::new();
    let mut total = zero();
    for v_d in tree.history(v_o)? {
        let in_group = match tree.kind(&v_d)? {
            NodeKind::Decision { agent, .. } => group.contains(agent),
            _ => false,
        };
        if !in_group {
            continue;
        }
        let taken = tree.choice_at(&v_d, v_o)?;
        let s = m.summand(variant, &v_d, &taken, &mut notes)?;
        total += &s;
        summands.insert(v_d, s);
    }
    Ok(ResponsibilityReport {
        variant,
        direction: Direction::Backward,
        node: v_o.clone(),
        value: total,
        per_decision_summands: summands,
        intermediates: notes,
    })
}

/// Forward responsibility for variants 1–4 at one of the group's decision
/// nodes.
pub fn rf_graded(
    tree: &DecisionTree,
    event: &Event,
    group: &Group,
    variant: VariantId,
    v_d: &NodeId,
) -> Result<ResponsibilityReport, RespError> {
    check_event(tree, event)?;
    require_group_decision(tree, group, v_d)?;
    let m = VariantCalc::new(tree, group, event);
    let mut notes = BTreeMap::new();
    let value = m.forward(variant, v_d, &mut notes)?;
    Ok(ResponsibilityReport {
        variant,
        direction: Direction::Forward,
        node: v_d.clone(),
        value,
        per_decision_summands: BTreeMap::new(),
        intermediates: notes,
    })
}

/// NESS-based backward responsibility: 1 iff some decision of the group on
/// the outcome's history is a necessary element of a sufficient set of taken
/// decisions.
pub fn ness_rb(tree: &DecisionTree, event: &Event, group: &Group, v_o: &NodeId) -> Result<Rat, RespError> {
    check_event(tree, event)?;
    require_outcome(tree, v_o)?;
    if !event.contains(v_o) {
        return Err(RespError::OutcomeNotInEvent(v_o.clone()));
    }
    // taken decisions: (information class, action) pairs along the history
    let hist = tree.history(v_o)?;
    let mut taken: Vec<(usize, ActionLabel)> = Vec::new();
    let mut group_owned: Vec<bool> = Vec::new();
    for v in &hist {
        if let NodeKind::Decision { agent, .. } = tree.kind(v)? {
            let class = tree.class_of_ix(tree.ix(v)?).unwrap();
            let action = tree.choice_at(v, v_o)?;
            if !taken.iter().any(|(c, a)| *c == class && *a == action) {
                taken.push((class, action));
                group_owned.push(group.contains(agent));
            }
        }
    }
    let n = taken.len();
    if n == 0 {
        return Ok(indicator(false));
    }
    // outcomes consistent with a decision set
    let decisions_of = |o: &NodeId| -> Vec<(usize, ActionLabel)> {
        let mut out = Vec::new();
        for v in tree.history(o).unwrap() {
            if matches!(tree.kind(&v).unwrap(), NodeKind::Decision { .. }) {
                let class = tree.class_of_ix(tree.ix(&v).unwrap()).unwrap();
                let action = tree.choice_at(&v, o).unwrap();
                out.push((class, action));
            }
        }
        out
    };
    let outcome_decisions: Vec<Vec<(usize, ActionLabel)>> =
        tree.outcomes().map(decisions_of).collect();
    let outcome_in_event: Vec<bool> = tree.outcomes().map(|o| event.contains(o)).collect();
    let sufficient = |mask: u32| -> bool {
        outcome_decisions.iter().zip(&outcome_in_event).all(|(ds, in_ev)| {
            let consistent = (0..n)
                .filter(|k| mask & (1 << k) != 0)
                .all(|k| ds.contains(&taken[k]));
            !consistent || *in_ev
        })
    };
    for d in 0..n {
        if !group_owned[d] {
            continue;
        }
        for mask in 0..(1u32 << n) {
            if mask & (1 << d) == 0 {
                continue;
            }
            if sufficient(mask) && !sufficient(mask & !(1 << d)) {
                return Ok(indicator(true));
            }
        }
    }
    Ok(indicator(false))
}

/// Unified entry point used by the CLI and the axiom battery.
pub fn evaluate(
    tree: &DecisionTree,
    event: &Event,
    group: &Group,
    variant: VariantId,
    direction: Direction,
    node: &NodeId,
) -> Result<ResponsibilityReport, RespError> {
    match (variant, direction) {
        (VariantId::V0, Direction::Backward) => {
            let value = rb0(tree, event, group, node)?;
            Ok(ResponsibilityReport {
                variant,
                direction,
                node: node.clone(),
                value,
                per_decision_summands: BTreeMap::new(),
                intermediates: BTreeMap::new(),
            })
        }
        (VariantId::Ness, Direction::Backward) => {
            let value = ness_rb(tree, event, group, node)?;
            Ok(ResponsibilityReport {
                variant,
                direction,
                node: node.clone(),
                value,
                per_decision_summands: BTreeMap::new(),
                intermediates: BTreeMap::new(),
            })
        }
        (VariantId::V0 | VariantId::Ness, Direction::Forward) => Err(RespError::NoForward(variant)),
        (_, Direction::Backward) => rb_graded(tree, event, group, variant, node),
        (_, Direction::Forward) => rf_graded(tree, event, group, variant, node),
    }
}
