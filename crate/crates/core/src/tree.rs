//! Multi-agent decision trees with ambiguity.
//!
//! A tree has four node kinds: decision nodes owned by an agent (with an
//! ordered action list), ambiguity nodes (possibilities without
//! probabilities), probability nodes (exact rational weights), and outcome
//! leaves. Decision nodes of one agent may share an information set, meaning
//! the agent cannot tell them apart and must act identically at all of them.
//!
//! Trees are immutable once validated; transforms build new trees.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::rat::Rat;
use num_traits::{One, Zero};

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }
        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.0)
            }
        }
        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }
    };
}

id_type!(
    /// Identifier of an agent (player).
    AgentId
);
id_type!(
    /// Identifier of a tree node.
    NodeId
);
id_type!(
    /// Label of an action available at a decision node.
    ActionLabel
);
id_type!(
    /// Identifier shared by information-equivalent decision nodes.
    InfoSetId
);

/// Kind and payload of a single node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Decision {
        agent: AgentId,
        /// `None` means a singleton (complete information) set.
        info_set: Option<InfoSetId>,
        /// Ordered action list; the order is structural (info sets must agree
        /// on it positionally).
        actions: Vec<(ActionLabel, NodeId)>,
    },
    Ambiguity {
        successors: Vec<NodeId>,
    },
    Probability {
        successors: Vec<(Rat, NodeId)>,
    },
    Outcome,
}

impl NodeKind {
    pub fn successor_ids(&self) -> Vec<&NodeId> {
        match self {
            NodeKind::Decision { actions, .. } => actions.iter().map(|(_, n)| n).collect(),
            NodeKind::Ambiguity { successors } => successors.iter().collect(),
            NodeKind::Probability { successors } => successors.iter().map(|(_, n)| n).collect(),
            NodeKind::Outcome => Vec::new(),
        }
    }
}

/// Unvalidated tree description in declaration order. The first node is the
/// root. Agents may be listed explicitly; any agent referenced by a decision
/// node is added either way.
#[derive(Clone, Debug, Default)]
pub struct TreeSpec {
    pub agents: Vec<AgentId>,
    pub nodes: Vec<(NodeId, NodeKind)>,
}

impl TreeSpec {
    pub fn push(&mut self, id: impl Into<String>, kind: NodeKind) {
        self.nodes.push((NodeId::new(id), kind));
    }
}

/// A reported invariant violation, with the offending node where known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub node: Option<NodeId>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Some(n) => write!(f, "{}: {}", n, self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Set of outcome nodes designated ethically undesired.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Event(pub BTreeSet<NodeId>);

impl Event {
    pub fn of<I: IntoIterator<Item = S>, S: Into<String>>(ids: I) -> Self {
        Event(ids.into_iter().map(NodeId::new).collect())
    }
    pub fn contains(&self, n: &NodeId) -> bool {
        self.0.contains(n)
    }
}

/// Nonempty set of agents whose joint responsibility is assessed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Group(pub BTreeSet<AgentId>);

impl Group {
    pub fn of<I: IntoIterator<Item = S>, S: Into<String>>(ids: I) -> Self {
        Group(ids.into_iter().map(AgentId::new).collect())
    }
    pub fn single(id: impl Into<String>) -> Self {
        Group::of([id.into()])
    }
    pub fn contains(&self, a: &AgentId) -> bool {
        self.0.contains(a)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|a| a.as_str()).collect();
        f.write_str(&names.join(","))
    }
}

pub(crate) type Ix = usize;

/// Validated, immutable decision tree with index structures for traversal.
#[derive(Clone)]
pub struct DecisionTree {
    agents: Vec<AgentId>,
    ids: Vec<NodeId>,
    kinds: Vec<NodeKind>,
    index: HashMap<NodeId, Ix>,
    parent: Vec<Option<Ix>>,
    /// Members of each information class, in node order. Every decision node
    /// belongs to exactly one class; singletons are implicit.
    classes: Vec<Vec<Ix>>,
    class_of: Vec<Option<usize>>,
    agent_of: Vec<Option<usize>>,
    preorder: Vec<Ix>,
}

impl fmt::Debug for DecisionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DecisionTree")
            .field("root", &self.ids[0])
            .field("nodes", &self.ids.len())
            .field("agents", &self.agents)
            .finish()
    }
}

/// Validate a [`TreeSpec`], returning either the immutable tree or the full
/// list of violations.
pub fn validate(spec: &TreeSpec) -> Result<DecisionTree, Vec<Violation>> {
    let mut violations = Vec::new();
    let bad = |node: Option<&NodeId>, message: String| Violation {
        node: node.cloned(),
        message,
    };

    if spec.nodes.is_empty() {
        return Err(vec![bad(None, "tree has no nodes".into())]);
    }

    let mut index: HashMap<NodeId, Ix> = HashMap::new();
    for (i, (id, _)) in spec.nodes.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            violations.push(bad(Some(id), format!("duplicate node id `{id}`")));
        }
    }

    let ids: Vec<NodeId> = spec.nodes.iter().map(|(id, _)| id.clone()).collect();
    let kinds: Vec<NodeKind> = spec.nodes.iter().map(|(_, k)| k.clone()).collect();
    let n = ids.len();

    // Edge structure: every node except the root has exactly one predecessor.
    let mut parent: Vec<Option<Ix>> = vec![None; n];
    for (i, kind) in kinds.iter().enumerate() {
        let succ = kind.successor_ids();
        if succ.is_empty() && !matches!(kind, NodeKind::Outcome) {
            violations.push(bad(Some(&ids[i]), "non-outcome node has no successor".into()));
        }
        let mut seen_here: BTreeSet<&NodeId> = BTreeSet::new();
        for s in succ {
            if !seen_here.insert(s) {
                violations.push(bad(Some(&ids[i]), format!("duplicate edge to `{s}`")));
                continue;
            }
            match index.get(s) {
                None => violations.push(bad(Some(&ids[i]), format!("edge to undeclared node `{s}`"))),
                Some(&j) => {
                    if j == 0 {
                        violations.push(bad(Some(&ids[i]), "edge back to the root".into()));
                    } else if let Some(p) = parent[j] {
                        violations.push(bad(
                            Some(&ids[j]),
                            format!("has two predecessors `{}` and `{}`", ids[p], ids[i]),
                        ));
                    } else {
                        parent[j] = Some(i);
                    }
                }
            }
        }
        if let NodeKind::Decision { actions, .. } = kind {
            let mut labels = BTreeSet::new();
            for (a, _) in actions {
                if !labels.insert(a) {
                    violations.push(bad(Some(&ids[i]), format!("duplicate action label `{a}`")));
                }
            }
        }
        if let NodeKind::Probability { successors } = kind {
            let mut sum = Rat::zero();
            for (w, s) in successors {
                if w < &Rat::zero() || w > &Rat::one() {
                    violations.push(bad(Some(&ids[i]), format!("weight {w} for `{s}` outside [0,1]")));
                }
                sum += w;
            }
            if !sum.is_one() {
                violations.push(bad(Some(&ids[i]), format!("weights sum to {sum}, not 1")));
            }
        }
    }
    for (j, p) in parent.iter().enumerate() {
        if j != 0 && p.is_none() {
            violations.push(bad(Some(&ids[j]), "unreachable from the root (no predecessor)".into()));
        }
    }

    // Reject cycles / forward-only check: a parent must precede its child in
    // some DFS from the root. We simply walk from the root and require that
    // every node is visited exactly once.
    if violations.is_empty() {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        let mut order = Vec::with_capacity(n);
        while let Some(i) = stack.pop() {
            if seen[i] {
                violations.push(bad(Some(&ids[i]), "node reached twice (not a tree)".into()));
                break;
            }
            seen[i] = true;
            order.push(i);
            let kind = &kinds[i];
            for s in kind.successor_ids().into_iter().rev() {
                stack.push(index[s]);
            }
        }
        if violations.is_empty() && order.len() != n {
            violations.push(bad(None, "graph is not connected".into()));
        }
    }

    // Leaves are exactly the outcome nodes.
    for (i, kind) in kinds.iter().enumerate() {
        if matches!(kind, NodeKind::Outcome) && !kind.successor_ids().is_empty() {
            violations.push(bad(Some(&ids[i]), "outcome node with successors".into()));
        }
    }

    // Agents and information sets.
    let mut agents: Vec<AgentId> = spec.agents.clone();
    for kind in &kinds {
        if let NodeKind::Decision { agent, .. } = kind {
            if !agents.contains(agent) {
                agents.push(agent.clone());
            }
        }
    }
    agents.sort();
    agents.dedup();
    let agent_index: HashMap<&AgentId, usize> = agents.iter().enumerate().map(|(i, a)| (a, i)).collect();

    let mut class_key: BTreeMap<InfoSetId, Vec<Ix>> = BTreeMap::new();
    for (i, kind) in kinds.iter().enumerate() {
        if let NodeKind::Decision { info_set: Some(y), .. } = kind {
            class_key.entry(y.clone()).or_default().push(i);
        }
    }
    for (y, members) in &class_key {
        let mut agent: Option<&AgentId> = None;
        let mut sig: Option<Vec<&ActionLabel>> = None;
        for &m in members {
            if let NodeKind::Decision { agent: a, actions, .. } = &kinds[m] {
                match agent {
                    None => agent = Some(a),
                    Some(prev) if prev != a => violations.push(bad(
                        Some(&ids[m]),
                        format!("info set `{y}` spans agents `{prev}` and `{a}`"),
                    )),
                    _ => {}
                }
                let labels: Vec<&ActionLabel> = actions.iter().map(|(l, _)| l).collect();
                match &sig {
                    None => sig = Some(labels),
                    Some(prev) if *prev != labels => violations.push(bad(
                        Some(&ids[m]),
                        format!("info set `{y}` members disagree on the ordered action list"),
                    )),
                    _ => {}
                }
            }
        }
        // No member may be an ancestor of another: the guaranteed/minimax
        // difference arguments all assume an agent never returns into a node
        // it cannot distinguish from one of its own ancestors.
        if violations.is_empty() {
            for &m in members {
                let mut cur = parent[m];
                while let Some(p) = cur {
                    if members.contains(&p) {
                        violations.push(bad(
                            Some(&ids[m]),
                            format!("info set `{y}` contains ancestor `{}` of `{}`", ids[p], ids[m]),
                        ));
                        break;
                    }
                    cur = parent[p];
                }
            }
        }
    }

    if !violations.is_empty() {
        return Err(violations);
    }

    let mut classes: Vec<Vec<Ix>> = Vec::new();
    let mut class_of: Vec<Option<usize>> = vec![None; n];
    for members in class_key.values() {
        let c = classes.len();
        for &m in members {
            class_of[m] = Some(c);
        }
        classes.push(members.clone());
    }
    for (i, kind) in kinds.iter().enumerate() {
        if matches!(kind, NodeKind::Decision { info_set: None, .. }) {
            let c = classes.len();
            class_of[i] = Some(c);
            classes.push(vec![i]);
        }
    }

    let agent_of: Vec<Option<usize>> = kinds
        .iter()
        .map(|k| match k {
            NodeKind::Decision { agent, .. } => Some(agent_index[agent]),
            _ => None,
        })
        .collect();

    let mut preorder = Vec::with_capacity(n);
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        preorder.push(i);
        for s in kinds[i].successor_ids().into_iter().rev() {
            stack.push(index[s]);
        }
    }

    Ok(DecisionTree {
        agents,
        ids,
        kinds,
        index,
        parent,
        classes,
        class_of,
        agent_of,
        preorder,
    })
}

/// Errors raised by navigation queries.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("node `{0}` is not on the history of `{1}`")]
    NotOnHistory(NodeId, NodeId),
    #[error("`{0}` is not a decision node")]
    NotDecision(NodeId),
}

impl DecisionTree {
    pub fn root(&self) -> &NodeId {
        &self.ids[0]
    }
    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }
    pub fn node_ids(&self) -> &[NodeId] {
        &self.ids
    }
    pub fn len(&self) -> usize {
        self.ids.len()
    }
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
    pub fn kind(&self, id: &NodeId) -> Result<&NodeKind, TreeError> {
        Ok(&self.kinds[self.ix(id)?])
    }
    pub fn contains(&self, id: &NodeId) -> bool {
        self.index.contains_key(id)
    }
    pub fn outcomes(&self) -> impl Iterator<Item = &NodeId> {
        self.ids
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| matches!(k, NodeKind::Outcome))
            .map(|(id, _)| id)
    }
    /// Nodes in preorder from the root (the canonical ordering).
    pub fn preorder_ids(&self) -> impl Iterator<Item = &NodeId> {
        self.preorder.iter().map(|&i| &self.ids[i])
    }
    /// Rebuild the spec this tree was validated from, in canonical preorder.
    pub fn to_spec(&self) -> TreeSpec {
        TreeSpec {
            agents: self.agents.clone(),
            nodes: self
                .preorder
                .iter()
                .map(|&i| (self.ids[i].clone(), self.kinds[i].clone()))
                .collect(),
        }
    }

    pub(crate) fn ix(&self, id: &NodeId) -> Result<Ix, TreeError> {
        self.index.get(id).copied().ok_or_else(|| TreeError::UnknownNode(id.clone()))
    }
    pub(crate) fn id_of(&self, ix: Ix) -> &NodeId {
        &self.ids[ix]
    }
    pub(crate) fn kind_of(&self, ix: Ix) -> &NodeKind {
        &self.kinds[ix]
    }
    pub(crate) fn parent_of(&self, ix: Ix) -> Option<Ix> {
        self.parent[ix]
    }
    pub(crate) fn n_nodes(&self) -> usize {
        self.ids.len()
    }
    pub(crate) fn class_of_ix(&self, ix: Ix) -> Option<usize> {
        self.class_of[ix]
    }
    pub(crate) fn class_members(&self, class: usize) -> &[Ix] {
        &self.classes[class]
    }
    pub(crate) fn n_classes(&self) -> usize {
        self.classes.len()
    }
    pub(crate) fn agent_ix_of(&self, ix: Ix) -> Option<usize> {
        self.agent_of[ix]
    }
    pub(crate) fn successors_ix(&self, ix: Ix) -> Vec<Ix> {
        self.kinds[ix].successor_ids().into_iter().map(|s| self.index[s]).collect()
    }
    pub(crate) fn actions_of(&self, ix: Ix) -> &[(ActionLabel, NodeId)] {
        match &self.kinds[ix] {
            NodeKind::Decision { actions, .. } => actions,
            _ => &[],
        }
    }
    /// Group membership test on interned agent index.
    pub(crate) fn agent_in_group(&self, agent_ix: usize, group: &Group) -> bool {
        group.contains(&self.agents[agent_ix])
    }
    /// True if `ix` is a decision node belonging to an agent of `group`.
    pub(crate) fn is_group_decision(&self, ix: Ix, group: &Group) -> bool {
        self.agent_of[ix].map(|a| self.agent_in_group(a, group)).unwrap_or(false)
    }
    /// Descendants of `ix` including itself.
    pub(crate) fn branch_ix(&self, ix: Ix) -> Vec<Ix> {
        let mut out = Vec::new();
        let mut stack = vec![ix];
        while let Some(i) = stack.pop() {
            out.push(i);
            for s in self.successors_ix(i) {
                stack.push(s);
            }
        }
        out
    }
    pub(crate) fn history_ix(&self, ix: Ix) -> Vec<Ix> {
        let mut rev = vec![ix];
        let mut cur = self.parent[ix];
        while let Some(p) = cur {
            rev.push(p);
            cur = self.parent[p];
        }
        rev.reverse();
        rev
    }
    /// Members of the information set containing `ix` (just `ix` for
    /// non-decision nodes).
    pub(crate) fn info_mates(&self, ix: Ix) -> Vec<Ix> {
        match self.class_of[ix] {
            Some(c) => self.classes[c].clone(),
            None => vec![ix],
        }
    }

    /// Ordered node list from the root to `v`.
    pub fn history(&self, v: &NodeId) -> Result<Vec<NodeId>, TreeError> {
        Ok(self.history_ix(self.ix(v)?).into_iter().map(|i| self.ids[i].clone()).collect())
    }

    /// Forward branch `B(v)`, or the information branch (union over the
    /// node's information set) when `info_aware` is set.
    pub fn branch(&self, v: &NodeId, info_aware: bool) -> Result<BTreeSet<NodeId>, TreeError> {
        let ix = self.ix(v)?;
        let roots = if info_aware { self.info_mates(ix) } else { vec![ix] };
        let mut out = BTreeSet::new();
        for r in roots {
            for i in self.branch_ix(r) {
                out.insert(self.ids[i].clone());
            }
        }
        Ok(out)
    }

    /// The choice at decision node `v_d` that ultimately led to `v`.
    pub fn choice_at(&self, v_d: &NodeId, v: &NodeId) -> Result<ActionLabel, TreeError> {
        let d = self.ix(v_d)?;
        let t = self.ix(v)?;
        if !matches!(self.kinds[d], NodeKind::Decision { .. }) {
            return Err(TreeError::NotDecision(v_d.clone()));
        }
        let hist = self.history_ix(t);
        let pos = hist
            .iter()
            .position(|&h| h == d)
            .ok_or_else(|| TreeError::NotOnHistory(v_d.clone(), v.clone()))?;
        let next = *hist.get(pos + 1).ok_or_else(|| TreeError::NotOnHistory(v_d.clone(), v.clone()))?;
        for (label, succ) in self.actions_of(d) {
            if self.index[succ] == next {
                return Ok(label.clone());
            }
        }
        unreachable!("history step not among successors");
    }

    /// True if the decision node is alone in its information set.
    pub fn is_complete_information(&self, v: &NodeId) -> Result<bool, TreeError> {
        let ix = self.ix(v)?;
        Ok(self.info_mates(ix).len() == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn gun_tree() -> TreeSpec {
        let mut s = TreeSpec::default();
        s.push(
            "v0",
            NodeKind::Ambiguity { successors: vec![NodeId::new("v1"), NodeId::new("v2")] },
        );
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
        s
    }

    #[test]
    fn validates_load_and_shoot() {
        let tree = validate(&gun_tree()).expect("valid");
        assert_eq!(tree.root(), &NodeId::new("v0"));
        assert_eq!(tree.agents(), &[AgentId::new("i")]);
        assert_eq!(tree.outcomes().count(), 4);
    }

    #[test]
    fn rejects_bad_probability_sum() {
        let mut s = TreeSpec::default();
        s.push(
            "p",
            NodeKind::Probability {
                successors: vec![(rat(1, 2), NodeId::new("a")), (rat(1, 3), NodeId::new("b"))],
            },
        );
        s.push("a", NodeKind::Outcome);
        s.push("b", NodeKind::Outcome);
        let errs = validate(&s).unwrap_err();
        assert!(errs.iter().any(|v| v.message.contains("sum")));
    }

    #[test]
    fn rejects_info_set_across_agents() {
        let mut s = gun_tree();
        if let NodeKind::Decision { agent, .. } = &mut s.nodes[2].1 {
            *agent = AgentId::new("j");
        }
        let errs = validate(&s).unwrap_err();
        assert!(errs.iter().any(|v| v.message.contains("spans agents")));
    }

    #[test]
    fn rejects_info_set_with_ancestor_member() {
        let mut s = TreeSpec::default();
        s.push(
            "r",
            NodeKind::Decision {
                agent: AgentId::new("i"),
                info_set: Some(InfoSetId::new("y")),
                actions: vec![
                    (ActionLabel::new("exit"), NodeId::new("o1")),
                    (ActionLabel::new("go"), NodeId::new("w")),
                ],
            },
        );
        s.push("o1", NodeKind::Outcome);
        s.push(
            "w",
            NodeKind::Decision {
                agent: AgentId::new("i"),
                info_set: Some(InfoSetId::new("y")),
                actions: vec![
                    (ActionLabel::new("exit"), NodeId::new("o2")),
                    (ActionLabel::new("go"), NodeId::new("o3")),
                ],
            },
        );
        s.push("o2", NodeKind::Outcome);
        s.push("o3", NodeKind::Outcome);
        let errs = validate(&s).unwrap_err();
        assert!(errs.iter().any(|v| v.message.contains("ancestor")));
    }

    #[test]
    fn history_and_choice() {
        let tree = validate(&gun_tree()).unwrap();
        let h = tree.history(&NodeId::new("v6")).unwrap();
        assert_eq!(h, vec![NodeId::new("v0"), NodeId::new("v2"), NodeId::new("v6")]);
        assert_eq!(tree.history(tree.root()).unwrap().len(), 1);
        assert_eq!(
            tree.choice_at(&NodeId::new("v2"), &NodeId::new("v6")).unwrap(),
            ActionLabel::new("shoot")
        );
        assert!(tree.choice_at(&NodeId::new("v1"), &NodeId::new("v6")).is_err());
    }

    #[test]
    fn info_branch_is_union() {
        let tree = validate(&gun_tree()).unwrap();
        let b = tree.branch(&NodeId::new("v1"), false).unwrap();
        let bi = tree.branch(&NodeId::new("v1"), true).unwrap();
        assert!(bi.is_superset(&b));
        assert!(bi.contains(&NodeId::new("v6")));
        assert!(!b.contains(&NodeId::new("v6")));
        // complete-information node: both flags agree
        let root_b = tree.branch(&NodeId::new("v0"), false).unwrap();
        let root_bi = tree.branch(&NodeId::new("v0"), true).unwrap();
        assert_eq!(root_b, root_bi);
    }
}
