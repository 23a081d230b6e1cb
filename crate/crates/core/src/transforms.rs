//! Tree-to-tree transformations used by the independence and monotonicity
//! axioms. Every transform returns a freshly validated tree together with a
//! node correspondence and the induced event.
//!
//! Copies of decision nodes (ambiguity pull-back, possibility cloning) stay
//! information-equivalent to their source's class; a complete-information
//! source that is copied gets a fresh shared class for its copies. Fresh node
//! ids are derived deterministically from the source id and a copy index.

use std::collections::{BTreeMap, BTreeSet};

use crate::rat::{zero, Rat};
use crate::tree::{
    validate, ActionLabel, AgentId, DecisionTree, Event, InfoSetId, NodeId, NodeKind, TreeSpec,
};
use num_traits::Zero;

/// Result of a transform: the new tree, where surviving nodes went, and the
/// induced event. Nodes copied more than once are listed in `copies`.
#[derive(Clone, Debug)]
pub struct TransformResult {
    pub tree: DecisionTree,
    pub event: Event,
    /// Single-valued correspondence for surviving nodes (dropped nodes are
    /// absent; multiplied nodes map to their first copy).
    pub node_map: BTreeMap<NodeId, NodeId>,
    /// All copies of nodes that were duplicated by the transform.
    pub copies: BTreeMap<NodeId, Vec<NodeId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("unknown agent `{0}`")]
    UnknownAgent(AgentId),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("transform produced an invalid tree: {0:?}")]
    Invalid(Vec<crate::tree::Violation>),
    #[error("identifier `{0}` already in use")]
    Collision(String),
}

fn pre(cond: bool, msg: &str) -> Result<(), TransformError> {
    if cond {
        Ok(())
    } else {
        Err(TransformError::Precondition(msg.to_string()))
    }
}

fn finish(
    spec: TreeSpec,
    event_members: BTreeSet<NodeId>,
    node_map: BTreeMap<NodeId, NodeId>,
    copies: BTreeMap<NodeId, Vec<NodeId>>,
) -> Result<TransformResult, TransformError> {
    let tree = validate(&spec).map_err(TransformError::Invalid)?;
    Ok(TransformResult { tree, event: Event(event_members), node_map, copies })
}

fn identity_map(tree: &DecisionTree, except: &BTreeSet<NodeId>) -> BTreeMap<NodeId, NodeId> {
    tree.node_ids()
        .iter()
        .filter(|n| !except.contains(n))
        .map(|n| (n.clone(), n.clone()))
        .collect()
}

fn surviving_event(event: &Event, node_map: &BTreeMap<NodeId, NodeId>) -> BTreeSet<NodeId> {
    event.0.iter().filter_map(|n| node_map.get(n).cloned()).collect()
}

fn kind_of<'t>(tree: &'t DecisionTree, id: &NodeId) -> Result<&'t NodeKind, TransformError> {
    tree.kind(id).map_err(|_| TransformError::UnknownNode(id.clone()))
}

/// Merge a complete-information decision node into its complete-information
/// predecessor of the same agent: the two decisions become one composite
/// decision (axiom IND).
pub fn merge_nested_decisions(
    tree: &DecisionTree,
    event: &Event,
    v_d: &NodeId,
    action: &ActionLabel,
) -> Result<TransformResult, TransformError> {
    let NodeKind::Decision { agent, info_set, actions } = kind_of(tree, v_d)?.clone() else {
        return Err(TransformError::Precondition(format!("`{v_d}` is not a decision node")));
    };
    pre(tree.is_complete_information(v_d).unwrap(), "outer node must be complete-information")?;
    let (_, child) = actions
        .iter()
        .find(|(l, _)| l == action)
        .ok_or_else(|| TransformError::Precondition(format!("no action `{action}` at `{v_d}`")))?;
    let child = child.clone();
    let NodeKind::Decision { agent: inner_agent, actions: inner_actions, .. } = kind_of(tree, &child)?.clone()
    else {
        return Err(TransformError::Precondition(format!("`{child}` is not a decision node")));
    };
    pre(tree.is_complete_information(&child).unwrap(), "inner node must be complete-information")?;
    pre(agent == inner_agent, "both decisions must belong to the same agent")?;

    let mut merged: Vec<(ActionLabel, NodeId)> =
        actions.iter().filter(|(l, _)| l != action).cloned().collect();
    for (inner_label, target) in &inner_actions {
        merged.push((ActionLabel::new(format!("{action}__{inner_label}")), target.clone()));
    }

    let mut spec = TreeSpec { agents: tree.agents().to_vec(), nodes: Vec::new() };
    for id in tree.preorder_ids() {
        if id == &child {
            continue;
        }
        let kind = if id == v_d {
            NodeKind::Decision { agent: agent.clone(), info_set: info_set.clone(), actions: merged.clone() }
        } else {
            tree.kind(id).unwrap().clone()
        };
        spec.nodes.push((id.clone(), kind));
    }
    let node_map = identity_map(tree, &[child].into_iter().collect());
    let members = surviving_event(event, &node_map);
    finish(spec, members, node_map, BTreeMap::new())
}

/// Pull an ambiguity node before its predecessor (axiom IAT). The branch of
/// `v` is replaced by one copy per possibility; when `v` is a decision node
/// the copy roots become information-equivalent.
pub fn pull_ambiguity_before(
    tree: &DecisionTree,
    event: &Event,
    v: &NodeId,
    v_a: &NodeId,
) -> Result<TransformResult, TransformError> {
    let v_kind = kind_of(tree, v)?.clone();
    match &v_kind {
        NodeKind::Probability { .. } => {}
        NodeKind::Decision { .. } => {
            pre(tree.is_complete_information(v).unwrap(), "decision node must be complete-information")?
        }
        _ => {
            return Err(TransformError::Precondition(format!(
                "`{v}` must be a probability or decision node"
            )))
        }
    }
    let NodeKind::Ambiguity { successors: possibilities } = kind_of(tree, v_a)?.clone() else {
        return Err(TransformError::Precondition(format!("`{v_a}` is not an ambiguity node")));
    };
    pre(
        v_kind.successor_ids().iter().any(|s| *s == v_a),
        "ambiguity node must be a direct successor of `v`",
    )?;

    let in_branch_v: BTreeSet<NodeId> = tree.branch(v, false).unwrap();
    let in_branch_va: BTreeSet<NodeId> = tree.branch(v_a, false).unwrap();
    // nodes copied into every possibility branch
    let shared: BTreeSet<NodeId> =
        in_branch_v.difference(&in_branch_va).filter(|n| *n != v_a).cloned().collect();

    // decision nodes copied more than once keep their class; a
    // complete-information source gets a fresh one shared by its copies
    let fresh_class = |id: &NodeId| InfoSetId::new(format!("iat_{id}"));
    let copy_id = |id: &NodeId, k: usize| NodeId::new(format!("{id}__c{k}"));
    for k in 0..possibilities.len() {
        for id in shared.iter().chain(tree.branch(&possibilities[k], false).unwrap().iter()) {
            if tree.contains(&copy_id(id, k)) {
                return Err(TransformError::Collision(copy_id(id, k).to_string()));
            }
        }
    }

    let mut outside_nodes: Vec<(NodeId, NodeKind)> = Vec::new();
    let mut node_map: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut copies: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();

    // nodes outside B(v): unchanged, except the edge into v now points at v_a
    for id in tree.preorder_ids() {
        if in_branch_v.contains(id) {
            continue;
        }
        let mut kind = tree.kind(id).unwrap().clone();
        let retarget = |t: &mut NodeId| {
            if t == v {
                *t = v_a.clone();
            }
        };
        match &mut kind {
            NodeKind::Decision { actions, .. } => actions.iter_mut().for_each(|(_, t)| retarget(t)),
            NodeKind::Ambiguity { successors } => successors.iter_mut().for_each(retarget),
            NodeKind::Probability { successors } => successors.iter_mut().for_each(|(_, t)| retarget(t)),
            NodeKind::Outcome => {}
        }
        outside_nodes.push((id.clone(), kind));
        node_map.insert(id.clone(), id.clone());
    }

    // the pulled ambiguity node, now heading the replaced branch
    let new_heads: Vec<NodeId> = (0..possibilities.len()).map(|k| copy_id(v, k)).collect();
    let va_entry = (v_a.clone(), NodeKind::Ambiguity { successors: new_heads });
    node_map.insert(v_a.clone(), v_a.clone());

    // one copy of B(v) per possibility, with B(v_a) replaced by B(p_k)
    let multiple = possibilities.len() > 1;
    let mut copy_entries: Vec<(NodeId, NodeKind)> = Vec::new();
    for (k, p_k) in possibilities.iter().enumerate() {
        let p_branch = tree.branch(p_k, false).unwrap();
        let mut subst: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        for id in shared.iter().chain(p_branch.iter()) {
            subst.insert(id.clone(), copy_id(id, k));
        }
        subst.insert(v_a.clone(), copy_id(p_k, k));
        for id in tree.preorder_ids() {
            let from_shared = shared.contains(id);
            if !from_shared && !p_branch.contains(id) {
                continue;
            }
            let mut kind = tree.kind(id).unwrap().clone();
            let map_target = |t: &mut NodeId| {
                if let Some(n) = subst.get(t) {
                    *t = n.clone();
                }
            };
            match &mut kind {
                NodeKind::Decision { actions, info_set, .. } => {
                    actions.iter_mut().for_each(|(_, t)| map_target(t));
                    if from_shared && multiple && info_set.is_none() {
                        *info_set = Some(fresh_class(id));
                    }
                }
                NodeKind::Ambiguity { successors } => successors.iter_mut().for_each(map_target),
                NodeKind::Probability { successors } => {
                    successors.iter_mut().for_each(|(_, t)| map_target(t))
                }
                NodeKind::Outcome => {}
            }
            let new_id = subst[id].clone();
            copies.entry(id.clone()).or_default().push(new_id.clone());
            node_map.entry(id.clone()).or_insert_with(|| new_id.clone());
            copy_entries.push((new_id, kind));
        }
    }

    // assemble in an order that keeps the root first
    let mut nodes = Vec::new();
    if v == tree.root() {
        nodes.push(va_entry);
        nodes.extend(copy_entries);
        nodes.extend(outside_nodes);
    } else {
        nodes.extend(outside_nodes);
        nodes.push(va_entry);
        nodes.extend(copy_entries);
    }
    let spec = TreeSpec { agents: tree.agents().to_vec(), nodes };

    let mut members = BTreeSet::new();
    for o in &event.0 {
        if let Some(cs) = copies.get(o) {
            members.extend(cs.iter().cloned());
        } else if let Some(m) = node_map.get(o) {
            members.insert(m.clone());
        }
    }
    finish(spec, members, node_map, copies)
}

/// Merge a nested ambiguity or probability node into its parent of the same
/// kind (axioms INA and INP); probability weights multiply.
pub fn merge_nested_uncertainty(
    tree: &DecisionTree,
    event: &Event,
    v: &NodeId,
    v_child: &NodeId,
) -> Result<TransformResult, TransformError> {
    let parent_kind = kind_of(tree, v)?.clone();
    let child_kind = kind_of(tree, v_child)?.clone();
    let merged = match (&parent_kind, &child_kind) {
        (NodeKind::Ambiguity { successors }, NodeKind::Ambiguity { successors: inner }) => {
            pre(successors.contains(v_child), "child must be a direct successor")?;
            let mut out = Vec::new();
            for s in successors {
                if s == v_child {
                    out.extend(inner.iter().cloned());
                } else {
                    out.push(s.clone());
                }
            }
            NodeKind::Ambiguity { successors: out }
        }
        (NodeKind::Probability { successors }, NodeKind::Probability { successors: inner }) => {
            let w_child = successors
                .iter()
                .find(|(_, s)| s == v_child)
                .map(|(w, _)| w.clone())
                .ok_or_else(|| TransformError::Precondition("child must be a direct successor".into()))?;
            let mut out = Vec::new();
            for (w, s) in successors {
                if s == v_child {
                    for (wi, si) in inner {
                        out.push((&w_child * wi, si.clone()));
                    }
                } else {
                    out.push((w.clone(), s.clone()));
                }
            }
            NodeKind::Probability { successors: out }
        }
        _ => {
            return Err(TransformError::Precondition(
                "both nodes must be ambiguity nodes or both probability nodes".into(),
            ))
        }
    };
    let mut spec = TreeSpec { agents: tree.agents().to_vec(), nodes: Vec::new() };
    for id in tree.preorder_ids() {
        if id == v_child {
            continue;
        }
        let kind = if id == v { merged.clone() } else { tree.kind(id).unwrap().clone() };
        spec.nodes.push((id.clone(), kind));
    }
    let node_map = identity_map(tree, &[v_child.clone()].into_iter().collect());
    let members = surviving_event(event, &node_map);
    finish(spec, members, node_map, BTreeMap::new())
}

/// Remove a node with a single successor, splicing the successor into the
/// predecessor (axiom IST).
pub fn eliminate_sure_thing(
    tree: &DecisionTree,
    event: &Event,
    v: &NodeId,
) -> Result<TransformResult, TransformError> {
    let kind = kind_of(tree, v)?.clone();
    let succ = kind.successor_ids();
    pre(succ.len() == 1, "node must have exactly one successor")?;
    if matches!(kind, NodeKind::Decision { .. }) {
        pre(tree.is_complete_information(v).unwrap(), "decision node must be complete-information")?;
    }
    let only = succ[0].clone();
    let mut spec = TreeSpec { agents: tree.agents().to_vec(), nodes: Vec::new() };
    for id in tree.preorder_ids() {
        if id == v {
            continue;
        }
        let mut k = tree.kind(id).unwrap().clone();
        let retarget = |t: &mut NodeId| {
            if t == v {
                *t = only.clone();
            }
        };
        match &mut k {
            NodeKind::Decision { actions, .. } => actions.iter_mut().for_each(|(_, t)| retarget(t)),
            NodeKind::Ambiguity { successors } => successors.iter_mut().for_each(retarget),
            NodeKind::Probability { successors } => successors.iter_mut().for_each(|(_, t)| retarget(t)),
            NodeKind::Outcome => {}
        }
        spec.nodes.push((id.clone(), k));
    }
    if v == tree.root() {
        let pos = spec.nodes.iter().position(|(id, _)| id == &only).unwrap();
        let entry = spec.nodes.remove(pos);
        spec.nodes.insert(0, entry);
    }
    let node_map = identity_map(tree, &[v.clone()].into_iter().collect());
    let members = surviving_event(event, &node_map);
    finish(spec, members, node_map, BTreeMap::new())
}

/// Remove a zero-probability successor and its branch (axiom IZP).
pub fn prune_zero_probability(
    tree: &DecisionTree,
    event: &Event,
    v_p: &NodeId,
    v_child: &NodeId,
) -> Result<TransformResult, TransformError> {
    let NodeKind::Probability { successors } = kind_of(tree, v_p)?.clone() else {
        return Err(TransformError::Precondition(format!("`{v_p}` is not a probability node")));
    };
    let w = successors
        .iter()
        .find(|(_, s)| s == v_child)
        .map(|(w, _)| w.clone())
        .ok_or_else(|| TransformError::Precondition("child must be a direct successor".into()))?;
    pre(w.is_zero(), "successor must have probability zero")?;
    let dropped: BTreeSet<NodeId> = tree.branch(v_child, false).unwrap();
    let mut spec = TreeSpec { agents: tree.agents().to_vec(), nodes: Vec::new() };
    for id in tree.preorder_ids() {
        if dropped.contains(id) {
            continue;
        }
        let kind = if id == v_p {
            NodeKind::Probability {
                successors: successors.iter().filter(|(_, s)| s != v_child).cloned().collect(),
            }
        } else {
            tree.kind(id).unwrap().clone()
        };
        spec.nodes.push((id.clone(), kind));
    }
    let node_map = identity_map(tree, &dropped);
    let members = surviving_event(event, &node_map);
    finish(spec, members, node_map, BTreeMap::new())
}

/// Append an exact copy of one possibility branch to an ambiguity node
/// (axiom ICP). Copied decision nodes join their source's information set.
pub fn clone_possibility(
    tree: &DecisionTree,
    event: &Event,
    v_a: &NodeId,
    v_child: &NodeId,
) -> Result<TransformResult, TransformError> {
    let NodeKind::Ambiguity { successors } = kind_of(tree, v_a)?.clone() else {
        return Err(TransformError::Precondition(format!("`{v_a}` is not an ambiguity node")));
    };
    pre(successors.contains(v_child), "child must be a direct successor")?;
    let branch: BTreeSet<NodeId> = tree.branch(v_child, false).unwrap();
    let copy_id = |id: &NodeId| NodeId::new(format!("{id}__cl"));
    for id in &branch {
        if tree.contains(&copy_id(id)) {
            return Err(TransformError::Collision(copy_id(id).to_string()));
        }
    }
    let subst: BTreeMap<NodeId, NodeId> = branch.iter().map(|id| (id.clone(), copy_id(id))).collect();
    // sources without an explicit class get a fresh one shared with the copy
    let needs_class: BTreeSet<NodeId> = branch
        .iter()
        .filter(|id| matches!(tree.kind(id).unwrap(), NodeKind::Decision { info_set: None, .. }))
        .cloned()
        .collect();
    let class_for = |id: &NodeId| InfoSetId::new(format!("icp_{id}"));

    let mut spec = TreeSpec { agents: tree.agents().to_vec(), nodes: Vec::new() };
    let mut copies: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for id in tree.preorder_ids() {
        let mut kind = tree.kind(id).unwrap().clone();
        if id == v_a {
            if let NodeKind::Ambiguity { successors } = &mut kind {
                successors.push(copy_id(v_child));
            }
        }
        if needs_class.contains(id) {
            if let NodeKind::Decision { info_set, .. } = &mut kind {
                *info_set = Some(class_for(id));
            }
        }
        spec.nodes.push((id.clone(), kind));
        if branch.contains(id) {
            let mut ck = tree.kind(id).unwrap().clone();
            let map_target = |t: &mut NodeId| {
                if let Some(n) = subst.get(t) {
                    *t = n.clone();
                }
            };
            match &mut ck {
                NodeKind::Decision { actions, info_set, .. } => {
                    actions.iter_mut().for_each(|(_, t)| map_target(t));
                    if needs_class.contains(id) {
                        *info_set = Some(class_for(id));
                    }
                }
                NodeKind::Ambiguity { successors } => successors.iter_mut().for_each(map_target),
                NodeKind::Probability { successors } => {
                    successors.iter_mut().for_each(|(_, t)| map_target(t))
                }
                NodeKind::Outcome => {}
            }
            spec.nodes.push((copy_id(id), ck));
            copies.insert(id.clone(), vec![copy_id(id)]);
        }
    }
    let node_map = identity_map(tree, &BTreeSet::new());
    let mut members: BTreeSet<NodeId> = event.0.clone();
    for o in &event.0 {
        if branch.contains(o) {
            members.insert(copy_id(o));
        }
    }
    finish(spec, members, node_map, copies)
}

/// Turn a complete-information decision node into an ambiguity node with the
/// same successors (axiom IOA; the caller checks the owner is outside the
/// assessed group).
pub fn decision_to_ambiguity(
    tree: &DecisionTree,
    event: &Event,
    v_d: &NodeId,
) -> Result<TransformResult, TransformError> {
    let NodeKind::Decision { actions, .. } = kind_of(tree, v_d)?.clone() else {
        return Err(TransformError::Precondition(format!("`{v_d}` is not a decision node")));
    };
    pre(tree.is_complete_information(v_d).unwrap(), "node must be complete-information")?;
    let mut spec = TreeSpec { agents: tree.agents().to_vec(), nodes: Vec::new() };
    for id in tree.preorder_ids() {
        let kind = if id == v_d {
            NodeKind::Ambiguity { successors: actions.iter().map(|(_, t)| t.clone()).collect() }
        } else {
            tree.kind(id).unwrap().clone()
        };
        spec.nodes.push((id.clone(), kind));
    }
    let node_map = identity_map(tree, &BTreeSet::new());
    let members = surviving_event(event, &node_map);
    finish(spec, members, node_map, BTreeMap::new())
}

/// Reassign every decision node of `from` to agent `to` (axiom IGC).
pub fn merge_group_agents(
    tree: &DecisionTree,
    event: &Event,
    to: &AgentId,
    from: &AgentId,
) -> Result<TransformResult, TransformError> {
    pre(to != from, "agents must differ")?;
    if !tree.agents().contains(to) {
        return Err(TransformError::UnknownAgent(to.clone()));
    }
    if !tree.agents().contains(from) {
        return Err(TransformError::UnknownAgent(from.clone()));
    }
    let mut spec = TreeSpec {
        agents: tree.agents().iter().filter(|a| *a != from).cloned().collect(),
        nodes: Vec::new(),
    };
    for id in tree.preorder_ids() {
        let mut kind = tree.kind(id).unwrap().clone();
        if let NodeKind::Decision { agent, .. } = &mut kind {
            if agent == from {
                *agent = to.clone();
            }
        }
        spec.nodes.push((id.clone(), kind));
    }
    let node_map = identity_map(tree, &BTreeSet::new());
    let members = surviving_event(event, &node_map);
    finish(spec, members, node_map, BTreeMap::new())
}

/// What [`relabel`] renames.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelabelKind {
    Agent,
    Action,
    Outcome,
}

/// Pure renaming of an agent, an action label, or an outcome node; event
/// membership is carried along (axioms Anon, ACon, OCon).
pub fn relabel(
    tree: &DecisionTree,
    event: &Event,
    kind: RelabelKind,
    old: &str,
    new: &str,
) -> Result<TransformResult, TransformError> {
    let mut spec = TreeSpec { agents: tree.agents().to_vec(), nodes: Vec::new() };
    match kind {
        RelabelKind::Agent => {
            let old = AgentId::new(old);
            let new = AgentId::new(new);
            if tree.agents().contains(&new) {
                return Err(TransformError::Collision(new.to_string()));
            }
            if !tree.agents().contains(&old) {
                return Err(TransformError::UnknownAgent(old));
            }
            spec.agents = tree
                .agents()
                .iter()
                .map(|a| if a == &old { new.clone() } else { a.clone() })
                .collect();
            for id in tree.preorder_ids() {
                let mut k = tree.kind(id).unwrap().clone();
                if let NodeKind::Decision { agent, .. } = &mut k {
                    if agent == &old {
                        *agent = new.clone();
                    }
                }
                spec.nodes.push((id.clone(), k));
            }
            let node_map = identity_map(tree, &BTreeSet::new());
            let members = surviving_event(event, &node_map);
            finish(spec, members, node_map, BTreeMap::new())
        }
        RelabelKind::Action => {
            let old = ActionLabel::new(old);
            let new = ActionLabel::new(new);
            for id in tree.preorder_ids() {
                let mut k = tree.kind(id).unwrap().clone();
                if let NodeKind::Decision { actions, .. } = &mut k {
                    if actions.iter().any(|(l, _)| l == &old) && actions.iter().any(|(l, _)| l == &new) {
                        return Err(TransformError::Collision(new.to_string()));
                    }
                    for (l, _) in actions.iter_mut() {
                        if l == &old {
                            *l = new.clone();
                        }
                    }
                }
                spec.nodes.push((id.clone(), k));
            }
            let node_map = identity_map(tree, &BTreeSet::new());
            let members = surviving_event(event, &node_map);
            finish(spec, members, node_map, BTreeMap::new())
        }
        RelabelKind::Outcome => {
            let old_id = NodeId::new(old);
            let new_id = NodeId::new(new);
            if tree.contains(&new_id) {
                return Err(TransformError::Collision(new.to_string()));
            }
            if !matches!(kind_of(tree, &old_id)?, NodeKind::Outcome) {
                return Err(TransformError::Precondition(format!("`{old}` is not an outcome node")));
            }
            for id in tree.preorder_ids() {
                let mut k = tree.kind(id).unwrap().clone();
                let retarget = |t: &mut NodeId| {
                    if t == &old_id {
                        *t = new_id.clone();
                    }
                };
                match &mut k {
                    NodeKind::Decision { actions, .. } => {
                        actions.iter_mut().for_each(|(_, t)| retarget(t))
                    }
                    NodeKind::Ambiguity { successors } => successors.iter_mut().for_each(retarget),
                    NodeKind::Probability { successors } => {
                        successors.iter_mut().for_each(|(_, t)| retarget(t))
                    }
                    NodeKind::Outcome => {}
                }
                let final_id = if id == &old_id { new_id.clone() } else { id.clone() };
                spec.nodes.push((final_id, k));
            }
            let mut node_map = identity_map(tree, &[old_id.clone()].into_iter().collect());
            node_map.insert(old_id, new_id);
            let members = surviving_event(event, &node_map);
            finish(spec, members, node_map, BTreeMap::new())
        }
    }
}

/// The complementary event over the tree's outcomes (axiom FCS).
pub fn complement_event(event: &Event, tree: &DecisionTree) -> Event {
    Event(tree.outcomes().filter(|o| !event.contains(o)).cloned().collect())
}

/// Remove an action and its branch from a complete-information decision node
/// (axioms CAM and PAM).
pub fn remove_action(
    tree: &DecisionTree,
    event: &Event,
    v_d: &NodeId,
    action: &ActionLabel,
) -> Result<TransformResult, TransformError> {
    let NodeKind::Decision { agent, info_set, actions } = kind_of(tree, v_d)?.clone() else {
        return Err(TransformError::Precondition(format!("`{v_d}` is not a decision node")));
    };
    pre(tree.is_complete_information(v_d).unwrap(), "node must be complete-information")?;
    pre(actions.len() >= 2, "cannot remove the last remaining action")?;
    let target = actions
        .iter()
        .find(|(l, _)| l == action)
        .map(|(_, t)| t.clone())
        .ok_or_else(|| TransformError::Precondition(format!("no action `{action}` at `{v_d}`")))?;
    let dropped: BTreeSet<NodeId> = tree.branch(&target, false).unwrap();
    let mut spec = TreeSpec { agents: tree.agents().to_vec(), nodes: Vec::new() };
    for id in tree.preorder_ids() {
        if dropped.contains(id) {
            continue;
        }
        let kind = if id == v_d {
            NodeKind::Decision {
                agent: agent.clone(),
                info_set: info_set.clone(),
                actions: actions.iter().filter(|(l, _)| l != action).cloned().collect(),
            }
        } else {
            tree.kind(id).unwrap().clone()
        };
        spec.nodes.push((id.clone(), kind));
    }
    let node_map = identity_map(tree, &dropped);
    let members = surviving_event(event, &node_map);
    finish(spec, members, node_map, BTreeMap::new())
}

/// Remove one possibility and its branch from an ambiguity node (axiom AMF).
pub fn remove_ambiguity_successor(
    tree: &DecisionTree,
    event: &Event,
    v_a: &NodeId,
    v_child: &NodeId,
) -> Result<TransformResult, TransformError> {
    let NodeKind::Ambiguity { successors } = kind_of(tree, v_a)?.clone() else {
        return Err(TransformError::Precondition(format!("`{v_a}` is not an ambiguity node")));
    };
    pre(successors.contains(v_child), "child must be a direct successor")?;
    pre(successors.len() >= 2, "cannot remove the last possibility")?;
    let dropped: BTreeSet<NodeId> = tree.branch(v_child, false).unwrap();
    let mut spec = TreeSpec { agents: tree.agents().to_vec(), nodes: Vec::new() };
    for id in tree.preorder_ids() {
        if dropped.contains(id) {
            continue;
        }
        let kind = if id == v_a {
            NodeKind::Ambiguity {
                successors: successors.iter().filter(|s| *s != v_child).cloned().collect(),
            }
        } else {
            tree.kind(id).unwrap().clone()
        };
        spec.nodes.push((id.clone(), kind));
    }
    let node_map = identity_map(tree, &dropped);
    let members = surviving_event(event, &node_map);
    finish(spec, members, node_map, BTreeMap::new())
}

/// Replace the distribution at a probability node (axiom PCont).
pub fn perturb_probabilities(
    tree: &DecisionTree,
    event: &Event,
    v_p: &NodeId,
    new_weights: &[Rat],
) -> Result<TransformResult, TransformError> {
    let NodeKind::Probability { successors } = kind_of(tree, v_p)?.clone() else {
        return Err(TransformError::Precondition(format!("`{v_p}` is not a probability node")));
    };
    pre(new_weights.len() == successors.len(), "weight count must match the successor count")?;
    let sum: Rat = new_weights.iter().cloned().fold(zero(), |a, b| a + b);
    pre(sum == crate::rat::one(), "weights must sum to 1")?;
    pre(new_weights.iter().all(|w| w >= &zero()), "weights must be nonnegative")?;
    let mut spec = TreeSpec { agents: tree.agents().to_vec(), nodes: Vec::new() };
    for id in tree.preorder_ids() {
        let kind = if id == v_p {
            NodeKind::Probability {
                successors: successors
                    .iter()
                    .zip(new_weights)
                    .map(|((_, s), w)| (w.clone(), s.clone()))
                    .collect(),
            }
        } else {
            tree.kind(id).unwrap().clone()
        };
        spec.nodes.push((id.clone(), kind));
    }
    let node_map = identity_map(tree, &BTreeSet::new());
    let members = surviving_event(event, &node_map);
    finish(spec, members, node_map, BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse;
    use crate::rat::rat;

    fn doc(text: &str) -> (DecisionTree, Event) {
        let d = parse(text).unwrap();
        (d.tree, d.event)
    }

    #[test]
    fn merge_decisions_counts_actions() {
        let (tree, event) = doc(
            r#"tree "t" {
              node a decision agent=i { act x -> b; act y -> o1; }
              node b decision agent=i { act p -> o2; act q -> o3; }
              node o1 outcome
              node o2 outcome bad
              node o3 outcome
            }"#,
        );
        let r = merge_nested_decisions(&tree, &event, &NodeId::new("a"), &ActionLabel::new("x")).unwrap();
        let NodeKind::Decision { actions, .. } = r.tree.kind(&NodeId::new("a")).unwrap() else {
            panic!()
        };
        assert_eq!(actions.len(), 3); // |A_a| - 1 + |A_b|
        assert!(r.event.contains(&NodeId::new("o2")));
        assert!(!r.tree.contains(&NodeId::new("b")));
    }

    #[test]
    fn merge_uncertainty_multiplies_weights() {
        let (tree, event) = doc(
            r#"tree "t" {
              node p probability { 1/2 -> q; 1/2 -> o1; }
              node q probability { 1/3 -> o2; 2/3 -> o3; }
              node o1 outcome
              node o2 outcome bad
              node o3 outcome
            }"#,
        );
        let r = merge_nested_uncertainty(&tree, &event, &NodeId::new("p"), &NodeId::new("q")).unwrap();
        let NodeKind::Probability { successors } = r.tree.kind(&NodeId::new("p")).unwrap() else {
            panic!()
        };
        assert_eq!(successors[0], (rat(1, 6), NodeId::new("o2")));
        assert_eq!(successors[1], (rat(1, 3), NodeId::new("o3")));
        assert_eq!(successors[2], (rat(1, 2), NodeId::new("o1")));
    }

    #[test]
    fn nested_ambiguity_flattens() {
        let (tree, event) = doc(
            r#"tree "t" {
              node a ambiguity { -> o1; -> b; }
              node b ambiguity { -> o2; -> o3; }
              node o1 outcome
              node o2 outcome
              node o3 outcome bad
            }"#,
        );
        let r = merge_nested_uncertainty(&tree, &event, &NodeId::new("a"), &NodeId::new("b")).unwrap();
        let NodeKind::Ambiguity { successors } = r.tree.kind(&NodeId::new("a")).unwrap() else {
            panic!()
        };
        assert_eq!(successors.len(), 3);
    }

    #[test]
    fn sure_thing_elimination_splices() {
        let (tree, event) = doc(
            r#"tree "t" {
              node d decision agent=i { act go -> p; act stop -> o1; }
              node p probability { 1 -> o2; }
              node o1 outcome
              node o2 outcome bad
            }"#,
        );
        let r = eliminate_sure_thing(&tree, &event, &NodeId::new("p")).unwrap();
        let NodeKind::Decision { actions, .. } = r.tree.kind(&NodeId::new("d")).unwrap() else {
            panic!()
        };
        assert_eq!(actions[0].1, NodeId::new("o2"));
    }

    #[test]
    fn clone_adds_an_equivalent_possibility() {
        let (tree, event) = doc(
            r#"tree "t" {
              node a ambiguity { -> d; -> o0; }
              node d decision agent=i { act x -> o1; act y -> o2; }
              node o0 outcome
              node o1 outcome bad
              node o2 outcome
            }"#,
        );
        let r = clone_possibility(&tree, &event, &NodeId::new("a"), &NodeId::new("d")).unwrap();
        let NodeKind::Ambiguity { successors } = r.tree.kind(&NodeId::new("a")).unwrap() else {
            panic!()
        };
        assert_eq!(successors.len(), 3);
        // copy joins the source's (fresh) information set
        assert!(!r.tree.is_complete_information(&NodeId::new("d")).unwrap());
        assert!(r.event.contains(&NodeId::new("o1__cl")));
        // double cloning works on the result too
        let r2 = clone_possibility(&r.tree, &r.event, &NodeId::new("a"), &NodeId::new("o0")).unwrap();
        let NodeKind::Ambiguity { successors } = r2.tree.kind(&NodeId::new("a")).unwrap() else {
            panic!()
        };
        assert_eq!(successors.len(), 4);
    }

    #[test]
    fn remove_action_refuses_last() {
        let (tree, event) = doc(
            r#"tree "t" {
              node d decision agent=i { act only -> o1; }
              node o1 outcome bad
            }"#,
        );
        assert!(matches!(
            remove_action(&tree, &event, &NodeId::new("d"), &ActionLabel::new("only")),
            Err(TransformError::Precondition(_))
        ));
    }

    #[test]
    fn relabel_round_trip_is_identity() {
        let (tree, event) = doc(
            r#"tree "t" {
              node d decision agent=i { act x -> o1; act y -> o2; }
              node o1 outcome bad
              node o2 outcome
            }"#,
        );
        let r = relabel(&tree, &event, RelabelKind::Outcome, "o1", "w").unwrap();
        assert!(r.event.contains(&NodeId::new("w")));
        assert_eq!(r.event.0.len(), event.0.len());
        let back = relabel(&r.tree, &r.event, RelabelKind::Outcome, "w", "o1").unwrap();
        let doc_a = crate::io::TreeDocument::new("t", tree, event);
        let doc_b = crate::io::TreeDocument::new("t", back.tree, back.event);
        assert_eq!(crate::io::serialize(&doc_a), crate::io::serialize(&doc_b));
    }

    #[test]
    fn complement_twice_is_identity() {
        let (tree, event) = doc(
            r#"tree "t" {
              node a ambiguity { -> o1; -> o2; }
              node o1 outcome bad
              node o2 outcome
            }"#,
        );
        let c = complement_event(&event, &tree);
        assert!(c.contains(&NodeId::new("o2")) && !c.contains(&NodeId::new("o1")));
        assert_eq!(complement_event(&c, &tree), event);
        assert_eq!(complement_event(&Event::default(), &tree).0.len(), 2);
    }

    #[test]
    fn pull_ambiguity_before_decision_builds_info_set() {
        let (tree, event) = doc(
            r#"tree "t" {
              node v decision agent=i { act a -> va; act b -> ob; }
              node va ambiguity { -> o1; -> o2; }
              node ob outcome
              node o1 outcome bad
              node o2 outcome
            }"#,
        );
        let r = pull_ambiguity_before(&tree, &event, &NodeId::new("v"), &NodeId::new("va")).unwrap();
        assert_eq!(r.tree.root(), &NodeId::new("va"));
        let heads = &r.copies[&NodeId::new("v")];
        assert_eq!(heads.len(), 2);
        assert!(!r.tree.is_complete_information(&heads[0]).unwrap());
        // event carried to the possibility copy
        assert!(r.event.contains(&NodeId::new("o1__c0")));
        // per possibility: a copy of v, of the possibility outcome, of ob
        assert_eq!(r.tree.len(), 1 + 2 * 3);
    }
}
