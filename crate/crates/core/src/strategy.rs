//! Strategies, scenarios, prospects and likelihoods.
//!
//! A strategy for a group G at a node assigns actions to all of G's decision
//! nodes that stay reachable from the node's information set given the
//! earlier assignments, consistently across information sets. A scenario
//! complements it: it fixes which information-equivalent node is actual and
//! assigns successors to all reachable ambiguity nodes and other agents'
//! decision nodes. A strategy-scenario pair induces a Markov process whose
//! outcome distribution is the prospect.

use std::collections::{BTreeMap, BTreeSet};

use crate::rat::{zero, Rat};
use crate::tree::{ActionLabel, DecisionTree, Event, Group, Ix, NodeId, NodeKind, TreeError};
use num_traits::One;

/// Maximal information-consistent assignment of actions for a group.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Strategy {
    pub origin: NodeId,
    pub assignments: BTreeMap<NodeId, ActionLabel>,
}

/// Maximal assignment of successors to ambiguity nodes and other agents'
/// decision nodes, starting from a fixed actual node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Scenario {
    pub actual: NodeId,
    pub assignments: BTreeMap<NodeId, NodeId>,
}

/// Probability distribution over reachable outcome nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prospect {
    pub distribution: BTreeMap<NodeId, Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("strategy and scenario are incompatible at `{0}`: no assignment for a reachable node")]
    Incompatible(NodeId),
}

/// The nodes whose information set the scenario's actual node may range
/// over. Equivalence only widens the choice when the queried node belongs to
/// an agent of the group itself: the actual-node freedom models the group's
/// own ignorance of where it stands.
pub(crate) fn actual_candidates(tree: &DecisionTree, v: Ix, group: &Group, info_aware: bool) -> Vec<Ix> {
    if info_aware && tree.is_group_decision(v, group) {
        tree.info_mates(v)
    } else {
        vec![v]
    }
}

/// Start set for strategies: the whole information set of the origin node
/// (for non-decision nodes, just the node).
pub(crate) fn strategy_starts(tree: &DecisionTree, v: Ix) -> Vec<Ix> {
    if tree.agent_ix_of(v).is_some() {
        tree.info_mates(v)
    } else {
        vec![v]
    }
}

/// Enumerate all strategies of `group` at `v`, in deterministic order
/// (node declaration order, then action order).
pub fn enumerate_strategies(tree: &DecisionTree, v: &NodeId, group: &Group) -> Result<Vec<Strategy>, TreeError> {
    let v_ix = tree.ix(v)?;
    let starts = strategy_starts(tree, v_ix);
    let mut out = Vec::new();
    let mut bound: BTreeMap<usize, usize> = BTreeMap::new(); // class -> action index
    enumerate_strategies_rec(tree, group, &starts, &mut bound, &mut out);
    Ok(out
        .into_iter()
        .map(|assignment| Strategy {
            origin: v.clone(),
            assignments: assignment
                .into_iter()
                .map(|(n, a)| (tree.id_of(n).clone(), tree.actions_of(n)[a].0.clone()))
                .collect(),
        })
        .collect())
}

fn enumerate_strategies_rec(
    tree: &DecisionTree,
    group: &Group,
    starts: &[Ix],
    bound: &mut BTreeMap<usize, usize>,
    out: &mut Vec<Vec<(Ix, usize)>>,
) {
    // Walk the reachable region given current bindings. G-nodes with a bound
    // class continue through the chosen action; unbound G-nodes stop the walk
    // (their subtrees are not yet reachable in a determined way).
    let mut reach_frontier: Vec<Ix> = Vec::new();
    let mut visited: BTreeSet<Ix> = BTreeSet::new();
    let mut first_unbound: Option<Ix> = None;
    let mut stack: Vec<Ix> = starts.to_vec();
    stack.reverse();
    while let Some(i) = stack.pop() {
        if !visited.insert(i) {
            continue;
        }
        if tree.is_group_decision(i, group) {
            let class = tree.class_of_ix(i).expect("decision node has a class");
            match bound.get(&class) {
                Some(&a) => {
                    reach_frontier.push(i);
                    let succ = tree.ix(&tree.actions_of(i)[a].1).unwrap();
                    stack.push(succ);
                }
                None => {
                    if first_unbound.is_none() {
                        first_unbound = Some(i);
                    }
                }
            }
        } else {
            for s in tree.successors_ix(i).into_iter().rev() {
                stack.push(s);
            }
        }
    }
    match first_unbound {
        None => {
            let mut assignment: Vec<(Ix, usize)> = reach_frontier
                .into_iter()
                .map(|i| (i, bound[&tree.class_of_ix(i).unwrap()]))
                .collect();
            assignment.sort();
            out.push(assignment);
        }
        Some(node) => {
            let class = tree.class_of_ix(node).unwrap();
            let n_actions = tree.actions_of(node).len();
            for a in 0..n_actions {
                bound.insert(class, a);
                enumerate_strategies_rec(tree, group, starts, bound, out);
            }
            bound.remove(&class);
        }
    }
}

/// Enumerate scenarios of `group` at `v`. With `info_aware` the actual node
/// ranges over the node's information set when that set belongs to the group
/// itself; otherwise the actual node is `v`.
pub fn enumerate_scenarios(
    tree: &DecisionTree,
    v: &NodeId,
    group: &Group,
    info_aware: bool,
) -> Result<Vec<Scenario>, TreeError> {
    let v_ix = tree.ix(v)?;
    let mut out = Vec::new();
    for actual in actual_candidates(tree, v_ix, group, info_aware) {
        let mut class_bound: BTreeMap<usize, usize> = BTreeMap::new();
        let mut node_bound: BTreeMap<Ix, usize> = BTreeMap::new();
        enumerate_scenarios_rec(tree, group, actual, &mut class_bound, &mut node_bound, &mut out);
    }
    Ok(out)
}

fn enumerate_scenarios_rec(
    tree: &DecisionTree,
    group: &Group,
    actual: Ix,
    class_bound: &mut BTreeMap<usize, usize>,
    node_bound: &mut BTreeMap<Ix, usize>,
    out: &mut Vec<Scenario>,
) {
    let mut frontier: Vec<(Ix, usize)> = Vec::new();
    let mut first_unbound: Option<(Ix, bool, usize)> = None; // (node, is_ambiguity, n_choices)
    let mut stack = vec![actual];
    let mut visited = BTreeSet::new();
    while let Some(i) = stack.pop() {
        if !visited.insert(i) {
            continue;
        }
        let kind = tree.kind_of(i);
        let in_group = tree.is_group_decision(i, group);
        match kind {
            NodeKind::Outcome => {}
            NodeKind::Probability { .. } => {
                for s in tree.successors_ix(i).into_iter().rev() {
                    stack.push(s);
                }
            }
            NodeKind::Decision { .. } if in_group => {
                // group's own node: the scenario does not constrain it
                for s in tree.successors_ix(i).into_iter().rev() {
                    stack.push(s);
                }
            }
            NodeKind::Decision { .. } => {
                let class = tree.class_of_ix(i).unwrap();
                match class_bound.get(&class) {
                    Some(&a) => {
                        frontier.push((i, a));
                        stack.push(tree.ix(&tree.actions_of(i)[a].1).unwrap());
                    }
                    None => {
                        if first_unbound.is_none() {
                            first_unbound = Some((i, false, tree.actions_of(i).len()));
                        }
                    }
                }
            }
            NodeKind::Ambiguity { successors } => match node_bound.get(&i) {
                Some(&c) => {
                    frontier.push((i, c));
                    stack.push(tree.ix(&successors[c]).unwrap());
                }
                None => {
                    if first_unbound.is_none() {
                        first_unbound = Some((i, true, successors.len()));
                    }
                }
            },
        }
    }
    match first_unbound {
        None => {
            let assignments = frontier
                .into_iter()
                .map(|(i, c)| {
                    let succ = match tree.kind_of(i) {
                        NodeKind::Decision { actions, .. } => actions[c].1.clone(),
                        NodeKind::Ambiguity { successors } => successors[c].clone(),
                        _ => unreachable!(),
                    };
                    (tree.id_of(i).clone(), succ)
                })
                .collect();
            out.push(Scenario { actual: tree.id_of(actual).clone(), assignments });
        }
        Some((node, is_ambiguity, n)) => {
            for c in 0..n {
                if is_ambiguity {
                    node_bound.insert(node, c);
                } else {
                    class_bound.insert(tree.class_of_ix(node).unwrap(), c);
                }
                enumerate_scenarios_rec(tree, group, actual, class_bound, node_bound, out);
            }
            if is_ambiguity {
                node_bound.remove(&node);
            } else {
                class_bound.remove(&tree.class_of_ix(node).unwrap());
            }
        }
    }
}

/// The outcome distribution induced by a strategy-scenario pair, starting at
/// the scenario's actual node with mass 1.
pub fn prospect(
    tree: &DecisionTree,
    _v: &NodeId,
    strategy: &Strategy,
    scenario: &Scenario,
    group: &Group,
) -> Result<Prospect, StrategyError> {
    let start = tree.ix(&scenario.actual)?;
    let mut dist: BTreeMap<NodeId, Rat> = BTreeMap::new();
    let mut stack: Vec<(Ix, Rat)> = vec![(start, Rat::one())];
    while let Some((i, mass)) = stack.pop() {
        match tree.kind_of(i) {
            NodeKind::Outcome => {
                *dist.entry(tree.id_of(i).clone()).or_insert_with(zero) += mass;
            }
            NodeKind::Probability { successors } => {
                for (w, s) in successors {
                    let m = &mass * w;
                    stack.push((tree.ix(s)?, m));
                }
            }
            NodeKind::Decision { actions, .. } => {
                let id = tree.id_of(i);
                if tree.is_group_decision(i, group) {
                    let label = strategy
                        .assignments
                        .get(id)
                        .ok_or_else(|| StrategyError::Incompatible(id.clone()))?;
                    let succ = actions
                        .iter()
                        .find(|(l, _)| l == label)
                        .ok_or_else(|| StrategyError::Incompatible(id.clone()))?;
                    stack.push((tree.ix(&succ.1)?, mass));
                } else {
                    let succ = scenario
                        .assignments
                        .get(id)
                        .ok_or_else(|| StrategyError::Incompatible(id.clone()))?;
                    stack.push((tree.ix(succ)?, mass));
                }
            }
            NodeKind::Ambiguity { .. } => {
                let id = tree.id_of(i);
                let succ = scenario
                    .assignments
                    .get(id)
                    .ok_or_else(|| StrategyError::Incompatible(id.clone()))?;
                stack.push((tree.ix(succ)?, mass));
            }
        }
    }
    Ok(Prospect { distribution: dist })
}

/// Likelihood of the event under a strategy-scenario pair.
pub fn likelihood(
    tree: &DecisionTree,
    event: &Event,
    v: &NodeId,
    strategy: &Strategy,
    scenario: &Scenario,
    group: &Group,
) -> Result<Rat, StrategyError> {
    let p = prospect(tree, v, strategy, scenario, group)?;
    Ok(p.distribution
        .iter()
        .filter(|(n, _)| event.contains(n))
        .map(|(_, w)| w.clone())
        .fold(zero(), |a, b| a + b))
}

/// Outcomes in the information branch of `v` consistent with the strategy at
/// every group decision node on their history.
pub fn strategy_outcomes(
    tree: &DecisionTree,
    v: &NodeId,
    group: &Group,
    strategy: &Strategy,
) -> Result<BTreeSet<NodeId>, TreeError> {
    let v_ix = tree.ix(v)?;
    let branch_roots = strategy_starts(tree, v_ix);
    let region: BTreeSet<Ix> = branch_roots.iter().flat_map(|&r| tree.branch_ix(r)).collect();
    let mut out = BTreeSet::new();
    'outcomes: for &o in region.iter() {
        if !matches!(tree.kind_of(o), NodeKind::Outcome) {
            continue;
        }
        let hist = tree.history_ix(o);
        for (pos, &h) in hist.iter().enumerate() {
            if !region.contains(&h) || !tree.is_group_decision(h, group) {
                continue;
            }
            let id = tree.id_of(h);
            if let Some(label) = strategy.assignments.get(id) {
                let next = hist[pos + 1];
                let taken = tree
                    .actions_of(h)
                    .iter()
                    .find(|(_, s)| tree.ix(s).unwrap() == next)
                    .map(|(l, _)| l);
                if taken != Some(label) {
                    continue 'outcomes;
                }
            }
        }
        out.insert(tree.id_of(o).clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{one, rat};
    use crate::tree::{validate, AgentId, InfoSetId, TreeSpec};

    fn gun() -> DecisionTree {
        let mut s = TreeSpec::default();
        s.push("v0", NodeKind::Ambiguity { successors: vec!["v1".into(), "v2".into()] });
        for (node, shoot_to, wait_to) in [("v1", "v4", "v3"), ("v2", "v6", "v5")] {
            s.push(
                node,
                NodeKind::Decision {
                    agent: AgentId::new("i"),
                    info_set: Some(InfoSetId::new("y")),
                    actions: vec![
                        (ActionLabel::new("shoot"), NodeId::new(shoot_to)),
                        (ActionLabel::new("wait"), NodeId::new(wait_to)),
                    ],
                },
            );
        }
        for o in ["v3", "v4", "v5", "v6"] {
            s.push(o, NodeKind::Outcome);
        }
        validate(&s).unwrap()
    }

    #[test]
    fn gun_has_two_strategies_at_root() {
        let t = gun();
        let g = Group::single("i");
        let strategies = enumerate_strategies(&t, &NodeId::new("v0"), &g).unwrap();
        // both decision nodes share one information set
        assert_eq!(strategies.len(), 2);
        for s in &strategies {
            assert_eq!(s.assignments.len(), 2);
        }
    }

    #[test]
    fn outcome_node_has_one_empty_strategy() {
        let t = gun();
        let g = Group::single("i");
        let strategies = enumerate_strategies(&t, &NodeId::new("v6"), &g).unwrap();
        assert_eq!(strategies.len(), 1);
        assert!(strategies[0].assignments.is_empty());
    }

    #[test]
    fn info_aware_scenarios_range_over_the_set() {
        let t = gun();
        let g = Group::single("i");
        let z = enumerate_scenarios(&t, &NodeId::new("v2"), &g, true).unwrap();
        assert_eq!(z.len(), 2);
        let actuals: BTreeSet<_> = z.iter().map(|s| s.actual.clone()).collect();
        assert!(actuals.contains(&NodeId::new("v1")) && actuals.contains(&NodeId::new("v2")));
        let z_plain = enumerate_scenarios(&t, &NodeId::new("v2"), &g, false).unwrap();
        assert_eq!(z_plain.len(), 1);
    }

    #[test]
    fn reachability_pruning_drops_dead_decisions() {
        // two consecutive binary complete-information decisions of i: the
        // second node is only reachable under one first action
        let mut s = TreeSpec::default();
        s.push(
            "a",
            NodeKind::Decision {
                agent: AgentId::new("i"),
                info_set: None,
                actions: vec![
                    (ActionLabel::new("l"), NodeId::new("b")),
                    (ActionLabel::new("r"), NodeId::new("o1")),
                ],
            },
        );
        s.push(
            "b",
            NodeKind::Decision {
                agent: AgentId::new("i"),
                info_set: None,
                actions: vec![
                    (ActionLabel::new("l"), NodeId::new("o2")),
                    (ActionLabel::new("r"), NodeId::new("o3")),
                ],
            },
        );
        for o in ["o1", "o2", "o3"] {
            s.push(o, NodeKind::Outcome);
        }
        let t = validate(&s).unwrap();
        let strategies = enumerate_strategies(&t, &NodeId::new("a"), &Group::single("i")).unwrap();
        assert_eq!(strategies.len(), 3);
    }

    #[test]
    fn prospect_multiplies_chained_probabilities() {
        let mut s = TreeSpec::default();
        s.push(
            "p",
            NodeKind::Probability {
                successors: vec![(rat(1, 2), NodeId::new("q")), (rat(1, 2), NodeId::new("o1"))],
            },
        );
        s.push(
            "q",
            NodeKind::Probability {
                successors: vec![(rat(1, 3), NodeId::new("o2")), (rat(2, 3), NodeId::new("o3"))],
            },
        );
        for o in ["o1", "o2", "o3"] {
            s.push(o, NodeKind::Outcome);
        }
        let t = validate(&s).unwrap();
        let g = Group::single("i");
        let sigma = enumerate_strategies(&t, &NodeId::new("p"), &g).unwrap().remove(0);
        let zeta = enumerate_scenarios(&t, &NodeId::new("p"), &g, true).unwrap().remove(0);
        let p = prospect(&t, &NodeId::new("p"), &sigma, &zeta, &g).unwrap();
        assert_eq!(p.distribution[&NodeId::new("o2")], rat(1, 6));
        let total: Rat = p.distribution.values().cloned().sum();
        assert_eq!(total, one());
        let ev = Event::of(["o2", "o3"]);
        assert_eq!(
            likelihood(&t, &ev, &NodeId::new("p"), &sigma, &zeta, &g).unwrap(),
            rat(1, 2)
        );
    }

    #[test]
    fn strategy_outcomes_follow_assignments() {
        let t = gun();
        let g = Group::single("i");
        let strategies = enumerate_strategies(&t, &NodeId::new("v0"), &g).unwrap();
        let shoot = strategies
            .iter()
            .find(|s| s.assignments.values().all(|a| a == &ActionLabel::new("shoot")))
            .unwrap();
        let outs = strategy_outcomes(&t, &NodeId::new("v0"), &g, shoot).unwrap();
        assert_eq!(outs, ["v4", "v6"].iter().map(|s| NodeId::new(*s)).collect());
    }
}
