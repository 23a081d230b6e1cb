//! Voting-method trees and their closed-form responsibility values.
//!
//! A group of `m` voters is modelled as a single agent whose actions are the
//! anonymous count classes of its ballots; the other `N - m` voters are a
//! second aggregate agent whose per-round decision nodes share one
//! information set (the rounds are simultaneous, so neither side sees the
//! other's ballots). Ties that the methods resolve "by lot" are modelled as
//! ambiguity nodes over the tied options, which reproduces the strict
//! inequality thresholds of the closed forms off the knife edge.

use std::collections::BTreeMap;

use crate::io::TreeDocument;
use crate::rat::{indicator, one, rat_int, zero, Rat};
use crate::resp::{Direction, VariantId};
use crate::tree::{validate, ActionLabel, AgentId, Event, InfoSetId, NodeId, NodeKind, TreeSpec};
use num_traits::{One, Zero};

pub const GROUP_AGENT: &str = "grp";
pub const OTHERS_AGENT: &str = "rest";
pub const CHAIR_AGENT: &str = "chair";

/// The voting methods with closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MethodId {
    TwoOptionMajority,
    MultiOptionMajority,
    Approval,
    RandomDictator,
    ConsensusOrRandomDictator,
    PollThenMajority,
    AmendmentThenMajority,
    SimpleRunoff,
    MedianEmissionsCap,
}

impl MethodId {
    pub const ALL: [MethodId; 9] = [
        MethodId::TwoOptionMajority,
        MethodId::MultiOptionMajority,
        MethodId::Approval,
        MethodId::RandomDictator,
        MethodId::ConsensusOrRandomDictator,
        MethodId::PollThenMajority,
        MethodId::AmendmentThenMajority,
        MethodId::SimpleRunoff,
        MethodId::MedianEmissionsCap,
    ];

    pub fn two_round(self) -> bool {
        matches!(
            self,
            MethodId::PollThenMajority | MethodId::AmendmentThenMajority | MethodId::SimpleRunoff
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            MethodId::TwoOptionMajority => "two-option-majority",
            MethodId::MultiOptionMajority => "multi-option-majority",
            MethodId::Approval => "approval",
            MethodId::RandomDictator => "random-dictator",
            MethodId::ConsensusOrRandomDictator => "consensus-or-random-dictator",
            MethodId::PollThenMajority => "poll-then-majority",
            MethodId::AmendmentThenMajority => "amendment-then-majority",
            MethodId::SimpleRunoff => "simple-runoff",
            MethodId::MedianEmissionsCap => "median-emissions-cap",
        }
    }

    pub fn from_name(s: &str) -> Option<MethodId> {
        MethodId::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Round {
    One,
    Two,
}

/// Parameters for a voting scenario. `u`, `a`, `b` are the group's ballot
/// counts per round (their meaning depends on the method); `cap_menu` pairs
/// cap values with tipping probabilities for median voting, and `caps` holds
/// the group's cap ballot as menu indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VotingParams {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    pub u: u32,
    pub a: u32,
    pub b: u32,
    pub cap_menu: Vec<(Rat, Rat)>,
    pub caps: Vec<usize>,
}

impl Default for VotingParams {
    fn default() -> Self {
        VotingParams {
            n: 3,
            m: 1,
            k: 2,
            u: 0,
            a: 0,
            b: 0,
            cap_menu: vec![
                (zero(), zero()),
                (one(), crate::rat::rat(1, 2)),
                (rat_int(2), one()),
            ],
            caps: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VotingError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("knife-edge ballot: |u - a| = {diff} is in {{m' = {m_prime}, m - 1 = {m_minus_1}}}")]
    KnifeEdge { diff: u32, m_prime: u32, m_minus_1: u32 },
    #[error("no closed form for this method/variant/direction/round combination")]
    CombinationAbsent,
}

fn check_basics(p: &VotingParams) -> Result<(), VotingError> {
    if p.n % 2 == 0 {
        return Err(VotingError::BadParams(format!("N = {} must be odd", p.n)));
    }
    if p.m == 0 || p.m > p.n {
        return Err(VotingError::BadParams(format!("m = {} must be in 1..=N", p.m)));
    }
    Ok(())
}

/// The knife-edge exclusion from the closed-form table; checked wherever the
/// method has both a `u` and an `a` ballot count.
pub fn is_knife_edge(p: &VotingParams, u: u32, a: u32) -> bool {
    let m_prime = p.n - p.m;
    let diff = u.abs_diff(a);
    diff == m_prime || diff == p.m - 1
}

fn reject_knife_edge(p: &VotingParams, u: u32, a: u32) -> Result<(), VotingError> {
    if is_knife_edge(p, u, a) {
        Err(VotingError::KnifeEdge {
            diff: u.abs_diff(a),
            m_prime: p.n - p.m,
            m_minus_1: p.m - 1,
        })
    } else {
        Ok(())
    }
}

/// Per-outcome effective ballot parameters recorded while building.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct EffParams {
    pub u: u32,
    pub a: u32,
    pub b: u32,
    pub caps: Vec<usize>,
    /// Whether a second-round decision lies on the outcome's history.
    pub reached_round2: bool,
    /// Whether the group ballot belongs to the family the closed forms are
    /// stated for (only approval restricts this).
    pub in_grid: bool,
    /// Consensus mark of the group ballot (0 = the undesired option,
    /// j > 0 = acceptable option j, -1 = mixed).
    pub cons_mark: Option<i64>,
}

impl Default for EffParams {
    fn default() -> Self {
        EffParams {
            u: 0,
            a: 0,
            b: 0,
            caps: Vec::new(),
            reached_round2: false,
            in_grid: true,
            cons_mark: None,
        }
    }
}

/// Structural metadata used by the cross-check driver.
pub(crate) struct VotingMeta {
    pub outcome_params: BTreeMap<NodeId, EffParams>,
    pub g2_nodes: Vec<NodeId>,
}

struct Builder {
    spec: TreeSpec,
    meta: VotingMeta,
}

impl Builder {
    fn new() -> Self {
        Builder {
            spec: TreeSpec::default(),
            meta: VotingMeta { outcome_params: BTreeMap::new(), g2_nodes: Vec::new() },
        }
    }

    fn group_node(&mut self, id: &str, info_set: Option<&str>, actions: Vec<(String, String)>) {
        self.spec.nodes.push((
            NodeId::new(id),
            NodeKind::Decision {
                agent: AgentId::new(GROUP_AGENT),
                info_set: info_set.map(InfoSetId::new),
                actions: actions
                    .into_iter()
                    .map(|(l, t)| (ActionLabel::new(l), NodeId::new(t)))
                    .collect(),
            },
        ));
    }

    fn others_node(&mut self, id: &str, info_set: &str, actions: Vec<(String, String)>) {
        self.spec.nodes.push((
            NodeId::new(id),
            NodeKind::Decision {
                agent: AgentId::new(OTHERS_AGENT),
                info_set: Some(InfoSetId::new(info_set)),
                actions: actions
                    .into_iter()
                    .map(|(l, t)| (ActionLabel::new(l), NodeId::new(t)))
                    .collect(),
            },
        ));
    }

    fn outcome(&mut self, id: &str, eff: EffParams) {
        self.spec.nodes.push((NodeId::new(id), NodeKind::Outcome));
        self.meta.outcome_params.insert(NodeId::new(id), eff);
    }

    /// Emit the result of a fully counted profile: a sure outcome, a tie
    /// ambiguity, or a lottery with the given probability of the undesired
    /// option. Returns the id the caller should link to, and records event
    /// members into `bad`.
    fn resolution(&mut self, stem: &str, res: Resolution, eff: EffParams, bad: &mut Vec<NodeId>) -> String {
        match res {
            Resolution::Safe => {
                let id = format!("s{stem}");
                self.outcome(&id, eff);
                id
            }
            Resolution::Bad => {
                let id = format!("w{stem}");
                bad.push(NodeId::new(&id));
                self.outcome(&id, eff);
                id
            }
            Resolution::Lottery(p) => {
                if p.is_zero() {
                    return self.resolution(stem, Resolution::Safe, eff, bad);
                }
                if p.is_one() {
                    return self.resolution(stem, Resolution::Bad, eff, bad);
                }
                let id = format!("p{stem}");
                let w = format!("w{stem}");
                let s = format!("s{stem}");
                self.spec.nodes.push((
                    NodeId::new(&id),
                    NodeKind::Probability {
                        successors: vec![
                            (p.clone(), NodeId::new(&w)),
                            (one() - &p, NodeId::new(&s)),
                        ],
                    },
                ));
                bad.push(NodeId::new(&w));
                self.outcome(&w, eff.clone());
                self.outcome(&s, eff);
                id
            }
            Resolution::Tie(opts) => {
                // a lot among the tied options, modelled as an unknown but
                // consistent tie-breaking rule: one chair decision per tied
                // set, information-equivalent across the tree
                let id = format!("t{stem}");
                let key = opts.iter().map(|o| o.to_string()).collect::<Vec<_>>().join("_");
                let mut actions = Vec::new();
                for &opt in &opts {
                    let target = if opt == 0 {
                        let w = format!("w{stem}");
                        bad.push(NodeId::new(&w));
                        self.outcome(&w, eff.clone());
                        w
                    } else {
                        let so = format!("s{stem}o{opt}");
                        self.outcome(&so, eff.clone());
                        so
                    };
                    actions.push((ActionLabel::new(format!("o{opt}")), NodeId::new(target)));
                }
                self.spec.nodes.push((
                    NodeId::new(&id),
                    NodeKind::Decision {
                        agent: AgentId::new(CHAIR_AGENT),
                        info_set: Some(InfoSetId::new(format!("tie_{key}"))),
                        actions,
                    },
                ));
                id
            }
        }
    }
}

enum Resolution {
    Safe,
    Bad,
    Lottery(Rat),
    /// Tied options by index (0 is the undesired one).
    Tie(Vec<usize>),
}

/// All count vectors of the given length summing to `total`.
fn compositions(total: u32, bins: usize) -> Vec<Vec<u32>> {
    fn rec(total: u32, bins: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if bins == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=total {
            prefix.push(c);
            rec(total - c, bins - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, bins, &mut Vec::new(), &mut out);
    out
}

/// All multisets of size `count` over `menu_len` items, as nondecreasing
/// index vectors.
fn multisets(count: u32, menu_len: usize) -> Vec<Vec<usize>> {
    fn rec(count: u32, from: usize, menu_len: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if count == 0 {
            out.push(prefix.clone());
            return;
        }
        for i in from..menu_len {
            prefix.push(i);
            rec(count - 1, i, menu_len, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(count, 0, menu_len, &mut Vec::new(), &mut out);
    out
}

fn joined(counts: &[u32]) -> String {
    counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("_")
}

/// Plurality winner set over option totals; `true` entries are in the top.
/// All-zero totals put every option in the top.
fn top_set(totals: &[u32]) -> Vec<bool> {
    let max = totals.iter().copied().max().unwrap_or(0);
    totals.iter().map(|&t| t == max).collect()
}

fn plurality_resolution(totals: &[u32]) -> Resolution {
    // index 0 is the undesired option
    let top = top_set(totals);
    if !top[0] {
        Resolution::Safe
    } else if top.iter().filter(|x| **x).count() == 1 {
        Resolution::Bad
    } else {
        Resolution::Tie(top.iter().enumerate().filter(|(_, t)| **t).map(|(i, _)| i).collect())
    }
}

/// Build the decision tree for a voting method. Ballot parameters are
/// validated (knife-edge combinations are rejected with a distinct error)
/// but do not influence the structure; they select the outcomes that the
/// closed forms describe.
pub fn build_voting_tree(method: MethodId, params: &VotingParams) -> Result<TreeDocument, VotingError> {
    validate_params(method, params)?;
    Ok(build_with_meta(method, params).0)
}

fn validate_params(method: MethodId, p: &VotingParams) -> Result<(), VotingError> {
    check_basics(p)?;
    let need = |cond: bool, msg: &str| {
        if cond {
            Ok(())
        } else {
            Err(VotingError::BadParams(msg.to_string()))
        }
    };
    match method {
        MethodId::TwoOptionMajority | MethodId::RandomDictator | MethodId::PollThenMajority => {
            need(p.u <= p.m, "u must not exceed m")?;
            reject_knife_edge(p, p.u, p.m - p.u)?;
        }
        MethodId::MultiOptionMajority | MethodId::Approval => {
            need(p.k >= 2, "k must be at least 2")?;
            need(p.u + p.a <= p.m, "u + a must not exceed m")?;
            reject_knife_edge(p, p.u, p.a)?;
        }
        MethodId::ConsensusOrRandomDictator => {
            need(p.k >= 2, "k must be at least 2")?;
            need(p.u <= p.m, "u must not exceed m")?;
            reject_knife_edge(p, p.u, p.m - p.u)?;
        }
        MethodId::AmendmentThenMajority => {
            need(p.a <= p.m && p.b <= p.m, "a and b must not exceed m")?;
        }
        MethodId::SimpleRunoff => {
            need(p.a + p.b <= p.m, "a + b must not exceed m")?;
            need(p.u <= p.m, "u must not exceed m")?;
            reject_knife_edge(p, p.u, p.a)?;
        }
        MethodId::MedianEmissionsCap => {
            need(!p.cap_menu.is_empty(), "cap menu must not be empty")?;
            need(p.cap_menu[0].1.is_zero(), "f at the lowest cap must be 0")?;
            need(p.cap_menu.last().unwrap().1.is_one(), "f at the highest cap must be 1")?;
            need(
                p.cap_menu.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1),
                "cap menu must be strictly increasing with weakly increasing f",
            )?;
            need(
                p.caps.is_empty() || p.caps.len() == p.m as usize,
                "caps must list one menu index per group member",
            )?;
            need(p.caps.iter().all(|&i| i < p.cap_menu.len()), "cap index out of range")?;
        }
    }
    Ok(())
}

pub(crate) fn build_with_meta(method: MethodId, p: &VotingParams) -> (TreeDocument, VotingMeta) {
    let mut b = Builder::new();
    let mut bad: Vec<NodeId> = Vec::new();
    let n = p.n;
    let m = p.m;
    let mp = n - m;
    let half = |x: u32| 2 * x > n; // x > N/2

    match method {
        MethodId::TwoOptionMajority => {
            let classes: Vec<u32> = (0..=mp).collect();
            let mut acts = Vec::new();
            for u in 0..=m {
                let target = if mp == 0 {
                    let eff = EffParams { u, a: m - u, ..EffParams::default() };
                    let res = if half(u) { Resolution::Bad } else { Resolution::Safe };
                    b.resolution(&format!("{u}"), res, eff, &mut bad)
                } else {
                    format!("o1_{u}")
                };
                acts.push((format!("u{u}"), target));
            }
            b.group_node("g1", None, acts);
            for u in 0..=m {
                if mp == 0 {
                    break;
                }
                let mut cacts = Vec::new();
                for &v in &classes {
                    let eff = EffParams { u, a: m - u, ..EffParams::default() };
                    let res = if half(u + v) { Resolution::Bad } else { Resolution::Safe };
                    let t = b.resolution(&format!("{u}_{v}"), res, eff, &mut bad);
                    cacts.push((format!("v{v}"), t));
                }
                b.others_node(&format!("o1_{u}"), "others1", cacts);
            }
        }
        MethodId::RandomDictator => {
            for u in 0..=m {
                if mp == 0 {
                    break;
                }
                let mut cacts = Vec::new();
                for v in 0..=mp {
                    let eff = EffParams { u, a: m - u, ..EffParams::default() };
                    let prob = Rat::new((u + v).into(), n.into());
                    let t = b.resolution(&format!("{u}_{v}"), Resolution::Lottery(prob), eff, &mut bad);
                    cacts.push((format!("v{v}"), t));
                }
                b.others_node(&format!("o1_{u}"), "others1", cacts);
            }
            let mut acts = Vec::new();
            for u in 0..=m {
                let target = if mp == 0 {
                    let eff = EffParams { u, a: m - u, ..EffParams::default() };
                    let prob = Rat::new(u.into(), n.into());
                    b.resolution(&format!("{u}"), Resolution::Lottery(prob), eff, &mut bad)
                } else {
                    format!("o1_{u}")
                };
                acts.push((format!("u{u}"), target));
            }
            b.group_node("g1", None, acts);
        }
        MethodId::MultiOptionMajority | MethodId::Approval => {
            let approval = method == MethodId::Approval;
            // option order: U, A_1..A_k (+ abstain bin for plurality ballots)
            let k = p.k as usize;
            let (g_ballots, o_ballots, totals_of): (
                Vec<Vec<u32>>,
                Vec<Vec<u32>>,
                Box<dyn Fn(&[u32], &[u32]) -> Vec<u32>>,
            ) = if approval {
                // ballots are subsets of the k+1 options
                let subsets: Vec<u32> = (0..(1u32 << (k + 1))).collect();
                let g = compositions(m, subsets.len());
                let o = compositions(mp, subsets.len());
                let f = move |gc: &[u32], oc: &[u32]| -> Vec<u32> {
                    let mut totals = vec![0u32; k + 1];
                    for (si, &s) in subsets.iter().enumerate() {
                        let count = gc[si] + oc.get(si).copied().unwrap_or(0);
                        if count == 0 {
                            continue;
                        }
                        for (opt, total) in totals.iter_mut().enumerate() {
                            if s & (1 << opt) != 0 {
                                *total += count;
                            }
                        }
                    }
                    totals
                };
                (g, o, Box::new(f))
            } else {
                let g = compositions(m, k + 2);
                let o = compositions(mp, k + 2);
                let f = move |gc: &[u32], oc: &[u32]| -> Vec<u32> {
                    (0..=k).map(|opt| gc[opt] + oc.get(opt).copied().unwrap_or(0)).collect()
                };
                (g, o, Box::new(f))
            };
            let eff_of = |gc: &[u32]| -> EffParams {
                if approval {
                    // the closed forms cover the ballot family u x {U},
                    // a x {all but U}, rest x {} only
                    let u_only = 1usize;
                    let all_but_u = (((1u32 << (k + 1)) - 1) & !1) as usize;
                    let in_grid = gc
                        .iter()
                        .enumerate()
                        .all(|(s, &c)| c == 0 || s == u_only || s == all_but_u || s == 0);
                    EffParams {
                        u: gc[u_only],
                        a: gc[all_but_u],
                        in_grid,
                        ..EffParams::default()
                    }
                } else {
                    // a is the best count among the acceptable options
                    let a = gc[1..=k].iter().copied().max().unwrap_or(0);
                    EffParams { u: gc[0], a, ..EffParams::default() }
                }
            };
            let mut acts = Vec::new();
            for (gi, gc) in g_ballots.iter().enumerate() {
                let target = if mp == 0 {
                    let res = plurality_resolution(&totals_of(gc, &[]));
                    b.resolution(&format!("{gi}"), res, eff_of(gc), &mut bad)
                } else {
                    format!("o1_{gi}")
                };
                acts.push((format!("b{}", joined(gc)), target));
            }
            b.group_node("g1", None, acts);
            for (gi, gc) in g_ballots.iter().enumerate() {
                if mp == 0 {
                    break;
                }
                let mut cacts = Vec::new();
                for (ci, oc) in o_ballots.iter().enumerate() {
                    let res = plurality_resolution(&totals_of(gc, oc));
                    let t = b.resolution(&format!("{gi}_{ci}"), res, eff_of(gc), &mut bad);
                    cacts.push((format!("b{}", joined(oc)), t));
                }
                b.others_node(&format!("o1_{gi}"), "others1", cacts);
            }
        }
        MethodId::ConsensusOrRandomDictator => {
            // consensus marks: one per option, plus "mixed" when the side has
            // at least two voters
            let k = p.k;
            let cons_marks = |size: u32| -> Vec<i64> {
                let mut v: Vec<i64> = (0..=(k as i64)).collect(); // 0 = U, j = A_j
                if size >= 2 {
                    v.push(-1); // mixed
                }
                v
            };
            let mark_name = |c: i64| -> String {
                match c {
                    -1 => "mix".to_string(),
                    0 => "U".to_string(),
                    j => format!("A{j}"),
                }
            };
            let g_ballots: Vec<(u32, i64)> = (0..=m)
                .flat_map(|u| cons_marks(m).into_iter().map(move |c| (u, c)))
                .collect();
            let o_ballots: Vec<(u32, i64)> = (0..=mp)
                .flat_map(|u| cons_marks(mp).into_iter().map(move |c| (u, c)))
                .collect();
            let resolve = |gu: u32, gc: i64, ou: u32, oc: i64| -> Resolution {
                let unanimous = if mp == 0 { gc >= 0 } else { gc >= 0 && gc == oc };
                if unanimous {
                    if gc == 0 {
                        Resolution::Bad
                    } else {
                        Resolution::Safe
                    }
                } else {
                    Resolution::Lottery(Rat::new((gu + ou).into(), n.into()))
                }
            };
            // the closed forms cover the ballot family "u members mark the
            // undesired option twice, the rest mark one acceptable option
            // twice": unanimous marks at the ends, mixed in between
            let eff_of = |gu: u32, gc: i64| {
                let in_grid = match gc {
                    0 => gu == m,
                    -1 => gu > 0 && gu < m,
                    _ => gu == 0,
                };
                EffParams {
                    u: gu,
                    a: m - gu,
                    cons_mark: Some(gc),
                    in_grid,
                    ..EffParams::default()
                }
            };
            let mut acts = Vec::new();
            for (gi, &(gu, gc)) in g_ballots.iter().enumerate() {
                let target = if mp == 0 {
                    b.resolution(&format!("{gi}"), resolve(gu, gc, 0, -2), eff_of(gu, gc), &mut bad)
                } else {
                    format!("o1_{gi}")
                };
                acts.push((format!("f{gu}_c{}", mark_name(gc)), target));
            }
            b.group_node("g1", None, acts);
            for (gi, &(gu, gc)) in g_ballots.iter().enumerate() {
                if mp == 0 {
                    break;
                }
                let mut cacts = Vec::new();
                for (ci, &(ou, oc)) in o_ballots.iter().enumerate() {
                    let t = b.resolution(
                        &format!("{gi}_{ci}"),
                        resolve(gu, gc, ou, oc),
                        eff_of(gu, gc),
                        &mut bad,
                    );
                    cacts.push((format!("f{ou}_c{}", mark_name(oc)), t));
                }
                b.others_node(&format!("o1_{gi}"), "others1", cacts);
            }
        }
        MethodId::PollThenMajority => {
            // round 1 is cheap talk: published totals, no formal effect
            let mut acts = Vec::new();
            for c in 0..=m {
                acts.push((format!("p{c}"), format!("o1_{c}")));
            }
            b.group_node("g1", None, acts);
            for c in 0..=m {
                let mut cacts = Vec::new();
                for w in 0..=mp {
                    cacts.push((format!("q{w}"), format!("g2_{c}_{w}")));
                }
                b.others_node(&format!("o1_{c}"), "others1", cacts);
            }
            for c in 0..=m {
                for w in 0..=mp {
                    let mut acts = Vec::new();
                    for u in 0..=m {
                        acts.push((format!("u{u}"), format!("o2_{c}_{w}_{u}")));
                    }
                    let g2 = format!("g2_{c}_{w}");
                    b.group_node(&g2, None, acts);
                    b.meta.g2_nodes.push(NodeId::new(&g2));
                    for u in 0..=m {
                        let mut cacts = Vec::new();
                        for v in 0..=mp {
                            let eff = EffParams {
                                u,
                                a: m - u,
                                reached_round2: true,
                                ..EffParams::default()
                            };
                            let res = if half(u + v) { Resolution::Bad } else { Resolution::Safe };
                            let t = b.resolution(&format!("{c}_{w}_{u}_{v}"), res, eff, &mut bad);
                            cacts.push((format!("v{v}"), t));
                        }
                        b.others_node(&format!("o2_{c}_{w}_{u}"), &format!("others2_{c}_{w}"), cacts);
                    }
                }
            }
        }
        MethodId::AmendmentThenMajority => {
            let mut acts = Vec::new();
            for a in 0..=m {
                acts.push((format!("a{a}"), format!("o1_{a}")));
            }
            b.group_node("g1", None, acts);
            for a in 0..=m {
                let mut cacts = Vec::new();
                for ap in 0..=mp {
                    let t = if half(a + ap) {
                        // the amendment A wins round 1
                        let eff = EffParams { a, b: m, ..EffParams::default() };
                        b.resolution(&format!("{a}_{ap}"), Resolution::Safe, eff, &mut bad)
                    } else {
                        format!("g2_{a}_{ap}")
                    };
                    cacts.push((format!("a{ap}"), t));
                }
                b.others_node(&format!("o1_{a}"), "others1", cacts);
            }
            for a in 0..=m {
                for ap in 0..=mp {
                    if half(a + ap) {
                        continue;
                    }
                    let g2 = format!("g2_{a}_{ap}");
                    let mut acts = Vec::new();
                    for bb in 0..=m {
                        acts.push((format!("b{bb}"), format!("o2_{a}_{ap}_{bb}")));
                    }
                    b.group_node(&g2, None, acts);
                    b.meta.g2_nodes.push(NodeId::new(&g2));
                    for bb in 0..=m {
                        let mut cacts = Vec::new();
                        for bp in 0..=mp {
                            let eff = EffParams { a, b: bb, reached_round2: true, ..EffParams::default() };
                            let res = if 2 * (bb + bp) < n { Resolution::Bad } else { Resolution::Safe };
                            let t = b.resolution(&format!("{a}_{ap}_{bb}_{bp}"), res, eff, &mut bad);
                            cacts.push((format!("b{bp}"), t));
                        }
                        b.others_node(&format!("o2_{a}_{ap}_{bb}"), &format!("others2_{a}_{ap}"), cacts);
                    }
                }
            }
        }
        MethodId::SimpleRunoff => {
            let g_ballots: Vec<(u32, u32)> =
                (0..=m).flat_map(|a| (0..=(m - a)).map(move |bb| (a, bb))).collect();
            let o_ballots: Vec<(u32, u32)> =
                (0..=mp).flat_map(|a| (0..=(mp - a)).map(move |bb| (a, bb))).collect();
            let mut acts = Vec::new();
            for &(a, bb) in &g_ballots {
                acts.push((format!("a{a}_b{bb}"), format!("o1_{a}_{bb}")));
            }
            b.group_node("g1", None, acts);
            #[derive(PartialEq)]
            enum R1 {
                Safe,
                Bad,
                Round2,
                TieAdvance,
            }
            let r1_result = |a_total: u32, b_total: u32| -> R1 {
                let u_total = n - a_total - b_total;
                if half(u_total) {
                    R1::Bad
                } else if half(a_total) || half(b_total) {
                    R1::Safe
                } else {
                    let fewest = a_total.min(b_total);
                    if u_total < fewest {
                        R1::Safe
                    } else if u_total == fewest {
                        R1::TieAdvance
                    } else {
                        R1::Round2
                    }
                }
            };
            let mut round2_sites: Vec<(String, u32, u32)> = Vec::new(); // (stem, a, b)
            for (gi, &(a, bb)) in g_ballots.iter().enumerate() {
                let mut cacts = Vec::new();
                for (ci, &(ap, bp)) in o_ballots.iter().enumerate() {
                    let stem = format!("{gi}_{ci}");
                    let eff_no_r2 = EffParams { a, b: bb, u: 0, ..EffParams::default() };
                    let t = match r1_result(a + ap, bb + bp) {
                        R1::Safe => b.resolution(&stem, Resolution::Safe, eff_no_r2, &mut bad),
                        R1::Bad => b.resolution(&stem, Resolution::Bad, eff_no_r2, &mut bad),
                        R1::Round2 => {
                            round2_sites.push((stem.clone(), a, bb));
                            format!("g2_{stem}")
                        }
                        R1::TieAdvance => {
                            // whether the undesired option survives the tie
                            // for fewest votes is up to the tie-breaking rule
                            let tie = format!("t{stem}");
                            let safe = b.resolution(
                                &format!("{stem}e"),
                                Resolution::Safe,
                                eff_no_r2.clone(),
                                &mut bad,
                            );
                            round2_sites.push((stem.clone(), a, bb));
                            b.spec.nodes.push((
                                NodeId::new(&tie),
                                NodeKind::Decision {
                                    agent: AgentId::new(CHAIR_AGENT),
                                    info_set: Some(InfoSetId::new("tie_fewest")),
                                    actions: vec![
                                        (ActionLabel::new("advance"), NodeId::new(format!("g2_{stem}"))),
                                        (ActionLabel::new("eliminate"), NodeId::new(safe)),
                                    ],
                                },
                            ));
                            tie
                        }
                    };
                    cacts.push((format!("a{ap}_b{bp}"), t));
                }
                b.others_node(&format!("o1_{gi}"), "others1", cacts);
            }
            for (stem, a, bb) in round2_sites {
                let g2 = format!("g2_{stem}");
                let mut acts = Vec::new();
                for u in 0..=m {
                    acts.push((format!("u{u}"), format!("o2_{stem}_{u}")));
                }
                b.group_node(&g2, None, acts);
                b.meta.g2_nodes.push(NodeId::new(&g2));
                for u in 0..=m {
                    let mut cacts = Vec::new();
                    for up in 0..=mp {
                        let eff =
                            EffParams { a, b: bb, u, reached_round2: true, ..EffParams::default() };
                        let res = if half(u + up) { Resolution::Bad } else { Resolution::Safe };
                        let t = b.resolution(&format!("{stem}_{u}_{up}"), res, eff, &mut bad);
                        cacts.push((format!("u{up}"), t));
                    }
                    b.others_node(&format!("o2_{stem}_{u}"), &format!("others2_{stem}"), cacts);
                }
            }
        }
        MethodId::MedianEmissionsCap => {
            let menu = &p.cap_menu;
            let g_ballots = multisets(m, menu.len());
            let o_ballots = multisets(mp, menu.len());
            let label = |caps: &[usize]| {
                format!("c{}", caps.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("_"))
            };
            let f_of = |gc: &[usize], oc: &[usize]| -> Rat {
                let mut all: Vec<usize> = gc.iter().chain(oc.iter()).copied().collect();
                all.sort();
                menu[all[(n as usize - 1) / 2]].1.clone()
            };
            let mut acts = Vec::new();
            for (gi, gc) in g_ballots.iter().enumerate() {
                let target = if mp == 0 {
                    let eff = EffParams { caps: gc.clone(), ..EffParams::default() };
                    b.resolution(&format!("{gi}"), Resolution::Lottery(f_of(gc, &[])), eff, &mut bad)
                } else {
                    format!("o1_{gi}")
                };
                acts.push((label(gc), target));
            }
            b.group_node("g1", None, acts);
            for (gi, gc) in g_ballots.iter().enumerate() {
                if mp == 0 {
                    break;
                }
                let mut cacts = Vec::new();
                for (ci, oc) in o_ballots.iter().enumerate() {
                    let eff = EffParams { caps: gc.clone(), ..EffParams::default() };
                    let t = b.resolution(
                        &format!("{gi}_{ci}"),
                        Resolution::Lottery(f_of(gc, oc)),
                        eff,
                        &mut bad,
                    );
                    cacts.push((label(oc), t));
                }
                b.others_node(&format!("o1_{gi}"), "others1", cacts);
            }
        }
    }

    // the group node must head the declaration order
    if b.spec.nodes[0].0 != NodeId::new("g1") {
        let pos = b.spec.nodes.iter().position(|(id, _)| id == &NodeId::new("g1")).unwrap();
        let entry = b.spec.nodes.remove(pos);
        b.spec.nodes.insert(0, entry);
    }
    b.spec.agents = vec![AgentId::new(GROUP_AGENT)];
    if mp > 0 {
        b.spec.agents.push(AgentId::new(OTHERS_AGENT));
    }
    let uses_chair = b.spec.nodes.iter().any(|(_, k)| {
        matches!(k, NodeKind::Decision { agent, .. } if agent == &AgentId::new(CHAIR_AGENT))
    });
    if uses_chair {
        b.spec.agents.push(AgentId::new(CHAIR_AGENT));
    }
    let tree = validate(&b.spec).expect("voting tree is valid");
    let doc = TreeDocument::new(
        format!("{}_n{}_m{}", method.name(), n, m),
        tree,
        Event(bad.into_iter().collect()),
    );
    (doc, b.meta)
}

/// The literal closed-form value for a method, variant, direction and round.
/// Two-round methods return the round's summand for backward queries.
pub fn closed_form(
    method: MethodId,
    variant: VariantId,
    direction: Direction,
    round: Round,
    p: &VotingParams,
) -> Result<Rat, VotingError> {
    check_basics(p)?;
    if matches!(variant, VariantId::Ness) {
        return Err(VotingError::CombinationAbsent);
    }
    if matches!(variant, VariantId::V0) && direction == Direction::Forward {
        return Err(VotingError::CombinationAbsent);
    }
    if round == Round::Two && !method.two_round() {
        return Err(VotingError::CombinationAbsent);
    }
    let n = i64::from(p.n);
    let m = i64::from(p.m);
    let mp = n - m;
    let u = i64::from(p.u);
    let a = i64::from(p.a);
    let b = i64::from(p.b);
    let majority = 2 * m > n;
    let frac = |num: i64| Rat::new(num.into(), n.into());

    use Direction::*;
    use VariantId::*;
    let value = match method {
        MethodId::TwoOptionMajority => match (direction, variant) {
            (Forward, V1 | V2) => indicator(majority),
            (Forward, V3 | V4) => one(),
            (Backward, V0 | V1) => indicator(2 * u > n),
            (Backward, V2) => indicator(2 * u > 2 * m - n && majority),
            (Backward, V3 | V4) => indicator(u > 0 && 2 * u > 2 * m - n),
            _ => return Err(VotingError::CombinationAbsent),
        },
        MethodId::MultiOptionMajority => match (direction, variant) {
            (Forward, V1 | V2) => indicator(majority),
            (Forward, V3) => one(),
            (Forward, V4) => indicator(2 * m >= n - 2),
            (Backward, V0) => indicator(u - a > mp),
            (Backward, V1) => indicator(u - a > mp),
            (Backward, V2) => indicator(a - u < mp && mp < m),
            (Backward, V3) => indicator(a - u < mp.min(m - 1) || 2 * m < n - 2),
            (Backward, V4) => indicator(a - u < mp.min(m - 1)) * indicator(2 * m >= n - 2),
            _ => return Err(VotingError::CombinationAbsent),
        },
        MethodId::Approval => match (direction, variant) {
            (Forward, V1 | V2) => indicator(majority),
            (Forward, V3 | V4) => one(),
            (Backward, V0) => indicator(u - a > mp),
            (Backward, V1) => indicator(u - a > mp),
            (Backward, V2) => indicator(a - u < mp && mp < m),
            (Backward, V3 | V4) => indicator(a - u < mp.min(m - 1)),
            _ => return Err(VotingError::CombinationAbsent),
        },
        MethodId::RandomDictator => match (direction, variant) {
            (Forward, V1 | V2 | V3 | V4) => frac(m),
            (Backward, V0) => indicator(u == n),
            (Backward, V1 | V2 | V3 | V4) => frac(u),
            _ => return Err(VotingError::CombinationAbsent),
        },
        MethodId::ConsensusOrRandomDictator => match (direction, variant) {
            (Forward, V1 | V2 | V4) => frac(m),
            (Forward, V3) => one(),
            (Backward, V0) => indicator(u == n),
            (Backward, V1) => indicator(a < m) * frac(u),
            (Backward, V2 | V4) => frac(u),
            (Backward, V3) => frac(u + mp),
            _ => return Err(VotingError::CombinationAbsent),
        },
        MethodId::PollThenMajority => match round {
            Round::One => match (direction, variant) {
                // answering the poll carries no responsibility, except that
                // the group's maximal influence over the whole future is
                // already 1 at the poll
                (Forward, V3) => one(),
                (Forward, V1 | V2 | V4) => zero(),
                (Backward, V0 | V1 | V2 | V3 | V4) => zero(),
                _ => return Err(VotingError::CombinationAbsent),
            },
            Round::Two => {
                return closed_form(
                    MethodId::TwoOptionMajority,
                    variant,
                    direction,
                    Round::One,
                    p,
                )
            }
        },
        MethodId::AmendmentThenMajority => match round {
            Round::One => match (direction, variant) {
                (Forward, V1 | V2) => zero(),
                (Forward, V3 | V4) => one(),
                (Backward, V0 | V1 | V2) => zero(),
                (Backward, V3 | V4) => indicator(a < m && 2 * m < n),
                _ => return Err(VotingError::CombinationAbsent),
            },
            Round::Two => match (direction, variant) {
                (Forward, V1 | V2) => indicator(majority),
                (Forward, V3 | V4) => one(),
                (Backward, V0 | V1) => indicator(2 * b < 2 * m - n),
                (Backward, V2) => indicator(2 * b < n && majority),
                (Backward, V3 | V4) => indicator(2 * b < n && b < m),
                _ => return Err(VotingError::CombinationAbsent),
            },
        },
        MethodId::SimpleRunoff => match round {
            Round::One => match (direction, variant) {
                (Forward, V1 | V2) => indicator(majority),
                (Forward, V3 | V4) => one(),
                (Backward, V0 | V1) => indicator(2 * (a + b) < 2 * m - n),
                (Backward, V2) => indicator(2 * (a + b) < n && majority),
                (Backward, V3 | V4) => indicator(6 * (a + b) < (6 * m - n).max(3 * n)),
                _ => return Err(VotingError::CombinationAbsent),
            },
            Round::Two => match (direction, variant) {
                (Forward, V1 | V2) => indicator(majority),
                (Forward, V3 | V4) => one(),
                (Backward, V0 | V1) => indicator(2 * u > n),
                (Backward, V2) => indicator(2 * u > 2 * m - n && majority),
                (Backward, V3 | V4) => indicator(u > 0 && 2 * u > 2 * m - n),
                _ => return Err(VotingError::CombinationAbsent),
            },
        },
        MethodId::MedianEmissionsCap => {
            let mut caps = p.caps.clone();
            caps.sort();
            if caps.len() != p.m as usize && direction == Backward {
                return Err(VotingError::BadParams("caps must hold the group's ballot".into()));
            }
            let f = |idx0: i64| -> Rat { p.cap_menu[caps[idx0 as usize]].1.clone() };
            match (direction, variant) {
                (Forward, V1 | V2) => indicator(majority),
                (Forward, V3 | V4) => one(),
                (Backward, V0) => {
                    if majority {
                        indicator(f(m - (n + 1) / 2).is_one())
                    } else {
                        zero()
                    }
                }
                (Backward, V1) => {
                    if majority {
                        f(m - (n + 1) / 2)
                    } else {
                        zero()
                    }
                }
                (Backward, V2) => {
                    if majority {
                        f((n + 1) / 2 - 1)
                    } else {
                        zero()
                    }
                }
                (Backward, V3 | V4) => f(m.min((n + 1) / 2) - 1),
                _ => return Err(VotingError::CombinationAbsent),
            }
        }
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use crate::resp::evaluate;
    use crate::tree::Group;

    fn grp() -> Group {
        Group::single(GROUP_AGENT)
    }

    #[test]
    fn two_option_n3_m1_matches_hand_values() {
        let p = VotingParams { n: 3, m: 1, u: 1, ..Default::default() };
        let doc = build_voting_tree(MethodId::TwoOptionMajority, &p).unwrap();
        // forward at the group's ballot node
        let g1 = NodeId::new("g1");
        for (variant, expect) in
            [(VariantId::V1, zero()), (VariantId::V2, zero()), (VariantId::V3, one()), (VariantId::V4, one())]
        {
            let got = evaluate(&doc.tree, &doc.event, &grp(), variant, Direction::Forward, &g1)
                .unwrap()
                .value;
            assert_eq!(got, expect, "rf{variant}");
        }
        // voted for U, another voter did too: full responsibility under 3/4
        let out = NodeId::new("w1_1");
        for (variant, expect) in [
            (VariantId::V0, zero()),
            (VariantId::V1, zero()),
            (VariantId::V2, zero()),
            (VariantId::V3, one()),
            (VariantId::V4, one()),
        ] {
            let got = evaluate(&doc.tree, &doc.event, &grp(), variant, Direction::Backward, &out)
                .unwrap()
                .value;
            assert_eq!(got, expect, "rb{variant}");
        }
    }

    #[test]
    fn random_dictator_grades_by_vote_share() {
        let p = VotingParams { n: 3, m: 1, u: 1, ..Default::default() };
        let doc = build_voting_tree(MethodId::RandomDictator, &p).unwrap();
        // u = 1: the lottery gives 1/3 everywhere
        let bad = doc.event.0.iter().find(|o| o.as_str().starts_with("w1_")).unwrap().clone();
        for variant in VariantId::GRADED {
            let got = evaluate(&doc.tree, &doc.event, &grp(), variant, Direction::Backward, &bad)
                .unwrap()
                .value;
            assert_eq!(got, rat(1, 3), "rb{variant}");
        }
        assert_eq!(
            evaluate(&doc.tree, &doc.event, &grp(), VariantId::V0, Direction::Backward, &bad)
                .unwrap()
                .value,
            zero()
        );
    }

    #[test]
    fn knife_edge_params_are_rejected_distinctly() {
        // N=3, m=1: m-1 = 0, so u = a = 0 sits on the knife edge
        let p = VotingParams { n: 3, m: 1, u: 0, a: 0, ..Default::default() };
        match build_voting_tree(MethodId::MultiOptionMajority, &p) {
            Err(VotingError::KnifeEdge { .. }) => {}
            other => panic!("expected knife-edge rejection, got {other:?}"),
        }
    }

    #[test]
    fn closed_forms_match_table_examples() {
        // two-option majority, N=3, m=1, u=1: variant 3 backward = 1
        let p = VotingParams { n: 3, m: 1, u: 1, ..Default::default() };
        assert_eq!(
            closed_form(MethodId::TwoOptionMajority, VariantId::V3, Direction::Backward, Round::One, &p)
                .unwrap(),
            one()
        );
        // consensus, N=3, m=1, u=1: (u + m')/N = 1
        let p = VotingParams { n: 3, m: 1, u: 1, ..Default::default() };
        assert_eq!(
            closed_form(
                MethodId::ConsensusOrRandomDictator,
                VariantId::V3,
                Direction::Backward,
                Round::One,
                &p
            )
            .unwrap(),
            one()
        );
        // simple runoff round 1, N=5, m=1, a+b=0: 0 < max(m - N/6, N/2)
        let p = VotingParams { n: 5, m: 1, a: 0, b: 0, ..Default::default() };
        assert_eq!(
            closed_form(MethodId::SimpleRunoff, VariantId::V3, Direction::Backward, Round::One, &p)
                .unwrap(),
            one()
        );
        // random dictator u/N
        let p = VotingParams { n: 3, m: 1, u: 1, ..Default::default() };
        assert_eq!(
            closed_form(MethodId::RandomDictator, VariantId::V1, Direction::Backward, Round::One, &p)
                .unwrap(),
            rat(1, 3)
        );
    }

    #[test]
    fn forward_v0_has_no_closed_form() {
        let p = VotingParams::default();
        assert_eq!(
            closed_form(MethodId::TwoOptionMajority, VariantId::V0, Direction::Forward, Round::One, &p),
            Err(VotingError::CombinationAbsent)
        );
    }
}
