//! Exact evaluation of likelihood extrema.
//!
//! All responsibility variants reduce to extrema of the event likelihood
//! over strategies and scenarios: the guaranteed likelihood (joint minimum),
//! the worst-case and minimax likelihoods, the scenario-wise optimum and the
//! likelihood range. Enumerating full strategy sets is exponential, so the
//! evaluator decomposes: choices whose information class touches a single
//! node of the query region are resolved locally during a memoized walk,
//! while classes coupled across branches (a shared commitment that several
//! plays can observe) are bound by explicit enumeration at the top. The
//! bound group choices are always enumerated outside the adversary choices,
//! preserving the commit-then-react order of the minimax definitions.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, HashMap};

use crate::rat::{indicator, zero, Rat};
use crate::strategy::{actual_candidates, enumerate_scenarios, Scenario, Strategy};
use crate::tree::{ActionLabel, DecisionTree, Event, Group, Ix, NodeId, NodeKind, TreeError};

#[derive(Clone, Copy, PartialEq, Eq)]
enum SigmaMode {
    Min,
    Max,
    Fixed,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ZetaMode {
    Min,
    Max,
    Fixed,
}

type Bindings = BTreeMap<usize, usize>; // info class -> action index

pub struct Evaluator<'a> {
    tree: &'a DecisionTree,
    group: &'a Group,
    in_event: Vec<bool>,
    in_group: Vec<bool>,
    depth: Vec<usize>,
    memo: RefCell<HashMap<(Ix, Vec<(usize, usize)>, u8, u64), Rat>>,
    epoch: Cell<u64>,
}

struct Ctx<'s> {
    sigma_mode: SigmaMode,
    zeta_mode: ZetaMode,
    sigma: Option<&'s BTreeMap<Ix, usize>>,
    zeta: Option<&'s BTreeMap<Ix, usize>>,
    bound: Bindings,
    mode_tag: u8,
    epoch: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(tree: &'a DecisionTree, group: &'a Group, event: &Event) -> Self {
        let n = tree.n_nodes();
        let mut in_event = vec![false; n];
        let mut in_group = vec![false; n];
        let mut depth = vec![0usize; n];
        for i in 0..n {
            if event.contains(tree.id_of(i)) {
                in_event[i] = true;
            }
            in_group[i] = tree.is_group_decision(i, group);
            if let Some(p) = tree.parent_of(i) {
                depth[i] = depth[p] + 1;
            }
        }
        // depth of children may be computed before parents only if indices
        // were unordered; recompute via histories to be safe
        for i in 0..n {
            depth[i] = tree.history_ix(i).len() - 1;
        }
        Evaluator {
            tree,
            group,
            in_event,
            in_group,
            depth,
            memo: RefCell::new(HashMap::new()),
            epoch: Cell::new(0),
        }
    }

    pub fn group(&self) -> &Group {
        self.group
    }

    /// Guaranteed likelihood: minimum over strategies and plain scenarios.
    pub fn gamma(&self, v: &NodeId) -> Result<Rat, TreeError> {
        let ix = self.tree.ix(v)?;
        Ok(self.extremal(&[ix], SigmaMode::Min, ZetaMode::Min, None, None, &Bindings::new()))
    }

    /// Minimax likelihood: smallest achievable worst case over info-aware
    /// scenarios.
    pub fn mu(&self, v: &NodeId) -> Result<Rat, TreeError> {
        let ix = self.tree.ix(v)?;
        let starts = actual_candidates(self.tree, ix, self.group, true);
        Ok(self.extremal(&starts, SigmaMode::Min, ZetaMode::Max, None, None, &Bindings::new()))
    }

    /// Worst-case likelihood of a fixed strategy over info-aware scenarios.
    pub fn lambda(&self, v: &NodeId, strategy: &Strategy) -> Result<Rat, TreeError> {
        let ix = self.tree.ix(v)?;
        let starts = actual_candidates(self.tree, ix, self.group, true);
        let sigma = self.index_strategy(strategy)?;
        Ok(self.extremal(&starts, SigmaMode::Fixed, ZetaMode::Max, Some(&sigma), None, &Bindings::new()))
    }

    /// Optimum the group can achieve in a fixed scenario, evaluated from the
    /// scenario's actual node.
    pub fn omega(&self, scenario: &Scenario) -> Result<Rat, TreeError> {
        let start = self.tree.ix(&scenario.actual)?;
        self.omega_from(start, scenario)
    }

    /// Optimum from an explicit start node under a fixed scenario (used for
    /// the shortfall after taking an action at the scenario's actual node).
    pub(crate) fn omega_from(&self, start: Ix, scenario: &Scenario) -> Result<Rat, TreeError> {
        let zeta = self.index_scenario(scenario)?;
        Ok(self.extremal(&[start], SigmaMode::Min, ZetaMode::Fixed, None, Some(&zeta), &Bindings::new()))
    }

    /// Likelihood range (max minus min over strategies) in a fixed scenario.
    pub fn ell_range(&self, scenario: &Scenario) -> Result<Rat, TreeError> {
        let start = self.tree.ix(&scenario.actual)?;
        let zeta = self.index_scenario(scenario)?;
        let lo = self.extremal(&[start], SigmaMode::Min, ZetaMode::Fixed, None, Some(&zeta), &Bindings::new());
        let hi = self.extremal(&[start], SigmaMode::Max, ZetaMode::Fixed, None, Some(&zeta), &Bindings::new());
        Ok(hi - lo)
    }

    /// Risk taken by choosing `action` at `v_d`: the maximum shortfall over
    /// all info-aware scenarios. Small scenario spaces are enumerated
    /// directly; large decomposable trees (such as the voting trees, where
    /// every coupling is gated by a group decision) use a split evaluation
    /// that binds only the adversary classes straddling the node's actions.
    pub fn rho(&self, v_d: &NodeId, action: &ActionLabel) -> Result<Rat, TreeError> {
        let d = self.tree.ix(v_d)?;
        if !matches!(self.tree.kind_of(d), NodeKind::Decision { .. }) {
            return Err(TreeError::NotDecision(v_d.clone()));
        }
        let starts = actual_candidates(self.tree, d, self.group, true);
        if !self.scenario_space_small(&starts) && self.region_decomposable(&starts) {
            return self.rho_decomposed(v_d, action, &starts);
        }
        let scenarios = enumerate_scenarios(self.tree, v_d, self.group, true)?;
        let mut best: Option<Rat> = None;
        for zeta in &scenarios {
            let actual = self.tree.ix(&zeta.actual)?;
            let succ = self
                .tree
                .actions_of(actual)
                .iter()
                .find(|(l, _)| l == action)
                .map(|(_, s)| self.tree.ix(s))
                .transpose()?
                .ok_or_else(|| TreeError::NotOnHistory(v_d.clone(), zeta.actual.clone()))?;
            let before = self.omega_from(actual, zeta)?;
            let after = self.omega_from(succ, zeta)?;
            let shortfall = after - before;
            if best.as_ref().map(|b| &shortfall > b).unwrap_or(true) {
                best = Some(shortfall);
            }
        }
        Ok(best.unwrap_or_else(zero))
    }

    /// Shortfall maximization without materializing scenarios: for every
    /// actual node and every binding of the adversary classes that straddle
    /// its actions, the shortfall is the optimum after the action (adversary
    /// locally worst) minus the best escape over the remaining actions
    /// (everything locally favourable), clamped by the after-value itself.
    fn rho_decomposed(&self, v_d: &NodeId, action: &ActionLabel, starts: &[Ix]) -> Result<Rat, TreeError> {
        let mut best: Option<Rat> = None;
        for &actual in starts {
            let pos = self
                .tree
                .actions_of(actual)
                .iter()
                .position(|(l, _)| l == action)
                .ok_or_else(|| TreeError::NotDecision(v_d.clone()))?;
            let children = self.tree.successors_ix(actual);
            for binding in self.split_bindings(actual) {
                let after = self.extremal(
                    &[children[pos]],
                    SigmaMode::Min,
                    ZetaMode::Max,
                    None,
                    None,
                    &binding,
                );
                let mut escape: Option<Rat> = None;
                for (i, &c) in children.iter().enumerate() {
                    if i == pos {
                        continue;
                    }
                    let lo = self.extremal(&[c], SigmaMode::Min, ZetaMode::Min, None, None, &binding);
                    if escape.as_ref().map(|e| &lo < e).unwrap_or(true) {
                        escape = Some(lo);
                    }
                }
                let before = match escape {
                    Some(e) => e.min(after.clone()),
                    None => after.clone(),
                };
                let shortfall = after - before;
                if best.as_ref().map(|b| &shortfall > b).unwrap_or(true) {
                    best = Some(shortfall);
                }
            }
        }
        Ok(best.unwrap_or_else(zero))
    }

    /// Group's influence at `v_d`: the maximum over scenarios of the
    /// likelihood range spanned by its strategies.
    pub fn influence(&self, v_d: &NodeId) -> Result<Rat, TreeError> {
        let d = self.tree.ix(v_d)?;
        if !matches!(self.tree.kind_of(d), NodeKind::Decision { .. }) {
            return Err(TreeError::NotDecision(v_d.clone()));
        }
        let starts = actual_candidates(self.tree, d, self.group, true);
        if !self.scenario_space_small(&starts) && self.region_decomposable(&starts) {
            let mut best = zero();
            for &start in &starts {
                let r = self.range_rec(start);
                if r > best {
                    best = r;
                }
            }
            return Ok(best);
        }
        let scenarios = enumerate_scenarios(self.tree, v_d, self.group, true)?;
        let mut best = zero();
        for zeta in &scenarios {
            let r = self.ell_range(zeta)?;
            if r > best {
                best = r;
            }
        }
        Ok(best)
    }

    /// Likelihood range reachable below `node` when the scenario is chosen
    /// adversarially to spread the strategies' values apart. Sound only in
    /// decomposable regions (the strategy plays diverge at group decision
    /// nodes; adversary classes straddling such a split are bound there).
    fn range_rec(&self, node: Ix) -> Rat {
        match self.tree.kind_of(node) {
            NodeKind::Outcome => zero(),
            NodeKind::Probability { successors } => {
                let mut acc = zero();
                for (w, s) in successors {
                    acc += w * self.range_rec(self.tree.ix(s).unwrap());
                }
                acc
            }
            NodeKind::Decision { .. } if self.in_group[node] => {
                let children = self.tree.successors_ix(node);
                let mut best = zero();
                for &c in &children {
                    let r = self.range_rec(c);
                    if r > best {
                        best = r;
                    }
                }
                for binding in self.split_bindings(node) {
                    let mut hi: Option<Rat> = None;
                    let mut lo: Option<Rat> = None;
                    for &c in &children {
                        let h =
                            self.extremal(&[c], SigmaMode::Max, ZetaMode::Max, None, None, &binding);
                        let l =
                            self.extremal(&[c], SigmaMode::Min, ZetaMode::Min, None, None, &binding);
                        if hi.as_ref().map(|x| &h > x).unwrap_or(true) {
                            hi = Some(h);
                        }
                        if lo.as_ref().map(|x| &l < x).unwrap_or(true) {
                            lo = Some(l);
                        }
                    }
                    let spread = hi.expect("children") - lo.expect("children");
                    if spread > best {
                        best = spread;
                    }
                }
                best
            }
            _ => {
                // the scenario commits one branch; both strategy plays follow
                let mut best = zero();
                for c in self.tree.successors_ix(node) {
                    let r = self.range_rec(c);
                    if r > best {
                        best = r;
                    }
                }
                best
            }
        }
    }

    /// Bindings over the adversary classes whose members sit under two or
    /// more distinct children of `x` (the classes a diverging play pair can
    /// both observe).
    fn split_bindings(&self, x: Ix) -> Vec<Bindings> {
        let children = self.tree.successors_ix(x);
        let mut owner: HashMap<usize, usize> = HashMap::new(); // class -> child slot
        let mut split: Vec<usize> = Vec::new();
        for (slot, &c) in children.iter().enumerate() {
            for i in self.tree.branch_ix(c) {
                if self.in_group[i] {
                    continue;
                }
                if let Some(class) = self.tree.class_of_ix(i) {
                    match owner.get(&class) {
                        None => {
                            owner.insert(class, slot);
                        }
                        Some(&prev) if prev != slot => {
                            if !split.contains(&class) {
                                split.push(class);
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
        split.sort();
        let sizes: Vec<usize> =
            split.iter().map(|&c| self.tree.actions_of(self.tree.class_members(c)[0]).len()).collect();
        product(&sizes)
            .into_iter()
            .map(|choice| split.iter().copied().zip(choice).collect::<Bindings>())
            .collect()
    }

    /// Conservative size estimate of the info-aware scenario space.
    fn scenario_space_small(&self, starts: &[Ix]) -> bool {
        const LIMIT: usize = 4096;
        let mut total: usize = 0;
        for &start in starts {
            let mut per_start: usize = 1;
            let mut seen_classes = Vec::new();
            for i in self.tree.branch_ix(start) {
                let choices = match self.tree.kind_of(i) {
                    NodeKind::Ambiguity { successors } => successors.len(),
                    NodeKind::Decision { .. } if !self.in_group[i] => {
                        let class = self.tree.class_of_ix(i).unwrap();
                        if seen_classes.contains(&class) {
                            continue;
                        }
                        seen_classes.push(class);
                        self.tree.actions_of(i).len()
                    }
                    _ => continue,
                };
                per_start = per_start.saturating_mul(choices);
                if per_start > LIMIT {
                    return false;
                }
            }
            total = total.saturating_add(per_start);
            if total > LIMIT {
                return false;
            }
        }
        true
    }

    /// True when every strategy coupling in the region is gated by a group
    /// decision and no adversary class couples through a probability node,
    /// so that commit-then-react evaluations decompose branch by branch.
    fn region_decomposable(&self, starts: &[Ix]) -> bool {
        let mut region = vec![false; self.tree.n_nodes()];
        for &s in starts {
            for i in self.tree.branch_ix(s) {
                region[i] = true;
            }
        }
        let mut members: Vec<Vec<Ix>> = vec![Vec::new(); self.tree.n_classes()];
        for i in 0..self.tree.n_nodes() {
            if region[i] {
                if let Some(c) = self.tree.class_of_ix(i) {
                    members[c].push(i);
                }
            }
        }
        for ms in members.iter().filter(|ms| ms.len() >= 2) {
            let in_group = self.in_group[ms[0]];
            for (ai, &a) in ms.iter().enumerate() {
                for &b in &ms[ai + 1..] {
                    let l = self.lca(a, b);
                    if in_group {
                        if !region[l] || !(self.in_group[l] && matches!(self.tree.kind_of(l), NodeKind::Decision { .. })) {
                            return false;
                        }
                    } else if region[l] && matches!(self.tree.kind_of(l), NodeKind::Probability { .. }) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Minimal risk at a decision node and the set of risk-minimizing
    /// actions, in action order.
    pub fn min_risk(&self, v_d: &NodeId) -> Result<(Rat, Vec<ActionLabel>), TreeError> {
        let d = self.tree.ix(v_d)?;
        let actions: Vec<ActionLabel> = self.tree.actions_of(d).iter().map(|(l, _)| l.clone()).collect();
        if actions.is_empty() {
            return Err(TreeError::NotDecision(v_d.clone()));
        }
        let risks: Vec<Rat> = actions.iter().map(|a| self.rho(v_d, a)).collect::<Result<_, _>>()?;
        let lo = risks.iter().min().cloned().expect("nonempty");
        let argmin = actions
            .into_iter()
            .zip(&risks)
            .filter(|(_, r)| *r == &lo)
            .map(|(a, _)| a)
            .collect();
        Ok((lo, argmin))
    }

    fn index_strategy(&self, s: &Strategy) -> Result<BTreeMap<Ix, usize>, TreeError> {
        let mut out = BTreeMap::new();
        for (node, label) in &s.assignments {
            let ix = self.tree.ix(node)?;
            let a = self
                .tree
                .actions_of(ix)
                .iter()
                .position(|(l, _)| l == label)
                .ok_or_else(|| TreeError::NotDecision(node.clone()))?;
            out.insert(ix, a);
        }
        Ok(out)
    }

    fn index_scenario(&self, z: &Scenario) -> Result<BTreeMap<Ix, usize>, TreeError> {
        let mut out = BTreeMap::new();
        for (node, succ) in &z.assignments {
            let ix = self.tree.ix(node)?;
            let s = self.tree.ix(succ)?;
            let pos = self
                .tree
                .successors_ix(ix)
                .iter()
                .position(|&c| c == s)
                .ok_or_else(|| TreeError::NotOnHistory(node.clone(), succ.clone()))?;
            out.insert(ix, pos);
        }
        Ok(out)
    }

    fn lca(&self, mut a: Ix, mut b: Ix) -> Ix {
        while self.depth[a] > self.depth[b] {
            a = self.tree.parent_of(a).expect("depth > 0");
        }
        while self.depth[b] > self.depth[a] {
            b = self.tree.parent_of(b).expect("depth > 0");
        }
        while a != b {
            a = self.tree.parent_of(a).expect("common root");
            b = self.tree.parent_of(b).expect("common root");
        }
        a
    }

    /// Core extremal computation from a set of alternative start nodes.
    /// Classes listed in `pre_bound` are fixed to the given choice and are
    /// not enumerated again.
    fn extremal(
        &self,
        starts: &[Ix],
        sigma_mode: SigmaMode,
        zeta_mode: ZetaMode,
        sigma: Option<&BTreeMap<Ix, usize>>,
        zeta: Option<&BTreeMap<Ix, usize>>,
        pre_bound: &Bindings,
    ) -> Rat {
        let mut region: Vec<bool> = vec![false; self.tree.n_nodes()];
        for &s in starts {
            for i in self.tree.branch_ix(s) {
                region[i] = true;
            }
        }
        // members per class inside the region
        let mut members: Vec<Vec<Ix>> = vec![Vec::new(); self.tree.n_classes()];
        for i in 0..self.tree.n_nodes() {
            if region[i] {
                if let Some(c) = self.tree.class_of_ix(i) {
                    members[c].push(i);
                }
            }
        }
        let class_is_group = |c: usize| self.in_group[self.tree.class_members(c)[0]];

        // adversary classes (others' decision nodes) coupled through a
        // probability node: their commitment is observed by parallel plays
        let mut coupled_z: Vec<usize> = Vec::new();
        if zeta_mode != ZetaMode::Fixed {
            for (c, ms) in members.iter().enumerate() {
                if class_is_group(c) || ms.len() < 2 || pre_bound.contains_key(&c) {
                    continue;
                }
                if self.has_prob_lca_pair(ms, &region) {
                    coupled_z.push(c);
                }
            }
        }

        // group classes that must be committed before the adversary moves
        let mut coupled_g: Vec<usize> = Vec::new();
        if sigma_mode != SigmaMode::Fixed {
            for (c, ms) in members.iter().enumerate() {
                if !class_is_group(c) || ms.is_empty() || pre_bound.contains_key(&c) {
                    continue;
                }
                let force_all = !coupled_z.is_empty();
                if force_all {
                    coupled_g.push(c);
                    continue;
                }
                if ms.len() < 2 {
                    continue;
                }
                // couple unless every pair splits at a group decision node
                // inside the region: there the group itself gates which
                // member plays, so a local choice is sound
                let mut needs = false;
                'pairs: for (ai, &a) in ms.iter().enumerate() {
                    for &b in &ms[ai + 1..] {
                        let l = self.lca(a, b);
                        if !region[l] || !self.in_group[l] {
                            needs = true;
                            break 'pairs;
                        }
                    }
                }
                if needs {
                    coupled_g.push(c);
                }
            }
        }

        // values computed against a fixed strategy or scenario must not be
        // shared across calls with different maps
        let epoch = if sigma.is_some() || zeta.is_some() {
            self.epoch.set(self.epoch.get() + 1);
            self.epoch.get()
        } else {
            0
        };
        let ctx_template = |bound: Bindings| Ctx {
            sigma_mode,
            zeta_mode,
            sigma,
            zeta,
            bound,
            mode_tag: mode_tag(sigma_mode, zeta_mode),
            epoch,
        };

        // enumerate group commitments (outer), then adversary commitments and
        // the start alternative (inner)
        let g_sizes: Vec<usize> = coupled_g
            .iter()
            .map(|&c| self.tree.actions_of(self.tree.class_members(c)[0]).len())
            .collect();
        let z_sizes: Vec<usize> = coupled_z
            .iter()
            .map(|&c| self.tree.actions_of(self.tree.class_members(c)[0]).len())
            .collect();

        let mut outer_best: Option<Rat> = None;
        for g_choice in product(&g_sizes) {
            let mut inner_best: Option<Rat> = None;
            for z_choice in product(&z_sizes) {
                let mut bound = pre_bound.clone();
                for (k, &c) in coupled_g.iter().enumerate() {
                    bound.insert(c, g_choice[k]);
                }
                for (k, &c) in coupled_z.iter().enumerate() {
                    bound.insert(c, z_choice[k]);
                }
                let ctx = ctx_template(bound);
                for &start in starts {
                    let val = self.node_value(start, &ctx);
                    let better = match zeta_mode {
                        ZetaMode::Max => inner_best.as_ref().map(|b| &val > b).unwrap_or(true),
                        ZetaMode::Min | ZetaMode::Fixed => {
                            inner_best.as_ref().map(|b| &val < b).unwrap_or(true)
                        }
                    };
                    if better {
                        inner_best = Some(val);
                    }
                }
            }
            let val = inner_best.expect("at least one start");
            let better = match sigma_mode {
                SigmaMode::Max => outer_best.as_ref().map(|b| &val > b).unwrap_or(true),
                SigmaMode::Min | SigmaMode::Fixed => outer_best.as_ref().map(|b| &val < b).unwrap_or(true),
            };
            if better {
                outer_best = Some(val);
            }
        }
        outer_best.expect("at least one commitment")
    }

    fn has_prob_lca_pair(&self, ms: &[Ix], region: &[bool]) -> bool {
        for (ai, &a) in ms.iter().enumerate() {
            for &b in &ms[ai + 1..] {
                let l = self.lca(a, b);
                if region[l] && matches!(self.tree.kind_of(l), NodeKind::Probability { .. }) {
                    return true;
                }
            }
        }
        false
    }

    fn node_value(&self, i: Ix, ctx: &Ctx<'_>) -> Rat {
        let key = (
            i,
            ctx.bound.iter().map(|(&a, &b)| (a, b)).collect::<Vec<_>>(),
            ctx.mode_tag,
            ctx.epoch,
        );
        if let Some(v) = self.memo.borrow().get(&key) {
            return v.clone();
        }
        let kind = self.tree.kind_of(i);
        let value = match kind {
            NodeKind::Outcome => indicator(self.in_event[i]),
            NodeKind::Probability { successors } => {
                let mut acc = zero();
                for (w, s) in successors {
                    let c = self.tree.ix(s).unwrap();
                    acc += w * self.node_value(c, ctx);
                }
                acc
            }
            NodeKind::Decision { .. } if self.in_group[i] => {
                let class = self.tree.class_of_ix(i).unwrap();
                if let Some(&a) = ctx.bound.get(&class) {
                    let c = self.tree.ix(&self.tree.actions_of(i)[a].1).unwrap();
                    self.node_value(c, ctx)
                } else {
                    match ctx.sigma_mode {
                        SigmaMode::Fixed => {
                            let a = *ctx
                                .sigma
                                .expect("fixed strategy")
                                .get(&i)
                                .expect("strategy covers reachable group node");
                            let c = self.tree.ix(&self.tree.actions_of(i)[a].1).unwrap();
                            self.node_value(c, ctx)
                        }
                        SigmaMode::Min => self.choose(i, ctx, true),
                        SigmaMode::Max => self.choose(i, ctx, false),
                    }
                }
            }
            NodeKind::Decision { .. } => {
                let class = self.tree.class_of_ix(i).unwrap();
                if let Some(&a) = ctx.bound.get(&class) {
                    let c = self.tree.ix(&self.tree.actions_of(i)[a].1).unwrap();
                    self.node_value(c, ctx)
                } else {
                    self.adversary(i, ctx)
                }
            }
            NodeKind::Ambiguity { .. } => self.adversary(i, ctx),
        };
        self.memo.borrow_mut().insert(key, value.clone());
        value
    }

    fn adversary(&self, i: Ix, ctx: &Ctx<'_>) -> Rat {
        match ctx.zeta_mode {
            ZetaMode::Fixed => {
                let s = *ctx
                    .zeta
                    .expect("fixed scenario")
                    .get(&i)
                    .expect("scenario covers reachable uncertainty node");
                let c = self.tree.successors_ix(i)[s];
                self.node_value(c, ctx)
            }
            ZetaMode::Min => self.choose(i, ctx, true),
            ZetaMode::Max => self.choose(i, ctx, false),
        }
    }

    fn choose(&self, i: Ix, ctx: &Ctx<'_>, minimize: bool) -> Rat {
        let mut best: Option<Rat> = None;
        for c in self.tree.successors_ix(i) {
            let val = self.node_value(c, ctx);
            let better = match (&best, minimize) {
                (None, _) => true,
                (Some(b), true) => &val < b,
                (Some(b), false) => &val > b,
            };
            if better {
                best = Some(val);
            }
        }
        best.expect("non-outcome node has successors")
    }
}

fn mode_tag(s: SigmaMode, z: ZetaMode) -> u8 {
    let a = match s {
        SigmaMode::Min => 0,
        SigmaMode::Max => 1,
        SigmaMode::Fixed => 2,
    };
    let b = match z {
        ZetaMode::Min => 0,
        ZetaMode::Max => 1,
        ZetaMode::Fixed => 2,
    };
    a * 3 + b
}

/// Cartesian product over choice counts, in lexicographic order.
fn product(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        let mut next = Vec::with_capacity(out.len() * n.max(1));
        for prefix in &out {
            for c in 0..n {
                let mut p = prefix.clone();
                p.push(c);
                next.push(p);
            }
        }
        out = next;
    }
    out
}
