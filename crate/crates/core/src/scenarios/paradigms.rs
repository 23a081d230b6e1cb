//! The paradigmatic example trees, with node names following the figures.

use crate::io::TreeDocument;
use crate::rat::{one, Rat};
use crate::tree::{validate, ActionLabel, AgentId, Event, InfoSetId, NodeId, NodeKind, TreeSpec};

/// Which paradigmatic situation to build. Probabilities are exact rationals
/// in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParadigmId {
    LoadAndShoot,
    RockThrowing,
    ChooseProbabilities(Rat, Rat),
    HesitationI(Rat),
    HesitationII,
    ClimateNoLearning,
    ClimateWithLearning,
    AmbiguityAversion(Rat),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parameter out of range: {0}")]
pub struct ParamError(pub String);

fn check_unit(name: &str, p: &Rat) -> Result<(), ParamError> {
    if p < &crate::rat::zero() || p > &one() {
        Err(ParamError(format!("{name} = {p} is not in [0, 1]")))
    } else {
        Ok(())
    }
}

fn decision(
    agent: &str,
    info_set: Option<&str>,
    actions: &[(&str, &str)],
) -> NodeKind {
    NodeKind::Decision {
        agent: AgentId::new(agent),
        info_set: info_set.map(InfoSetId::new),
        actions: actions
            .iter()
            .map(|(l, t)| (ActionLabel::new(*l), NodeId::new(*t)))
            .collect(),
    }
}

fn ambiguity(successors: &[&str]) -> NodeKind {
    NodeKind::Ambiguity { successors: successors.iter().map(|s| NodeId::new(*s)).collect() }
}

fn probability(successors: &[(Rat, &str)]) -> NodeKind {
    NodeKind::Probability {
        successors: successors.iter().map(|(w, t)| (w.clone(), NodeId::new(*t))).collect(),
    }
}

/// Build the canonical tree for a paradigmatic situation.
pub fn build_paradigmatic(id: &ParadigmId) -> Result<TreeDocument, ParamError> {
    let mut s = TreeSpec::default();
    let (name, event): (&str, Vec<&str>) = match id {
        ParadigmId::LoadAndShoot => {
            // an ambiguity whether the gun is loaded, then the shooter's
            // information set over the two states
            s.push("v0", ambiguity(&["v1", "v2"]));
            s.push("v1", decision("i", Some("y"), &[("shoot", "v4"), ("wait", "v3")]));
            s.push("v2", decision("i", Some("y"), &[("shoot", "v6"), ("wait", "v5")]));
            for o in ["v3", "v4", "v5", "v6"] {
                s.push(o, NodeKind::Outcome);
            }
            ("load_and_shoot", vec!["v6"])
        }
        ParadigmId::RockThrowing => {
            // j throws first (or not); i cannot tell which happened
            s.push("v0", decision("j", None, &[("not_throw", "v1"), ("throw", "v2")]));
            s.push("v1", decision("i", Some("y"), &[("throw", "v6"), ("not_throw", "v3")]));
            s.push("v2", decision("i", Some("y"), &[("throw", "v4"), ("not_throw", "v5")]));
            for o in ["v3", "v4", "v5", "v6"] {
                s.push(o, NodeKind::Outcome);
            }
            ("rock_throwing", vec!["v4", "v5", "v6"])
        }
        ParadigmId::ChooseProbabilities(p, q) => {
            check_unit("p", p)?;
            check_unit("q", q)?;
            s.push("v1", decision("i", None, &[("p", "u2"), ("q", "u3")]));
            s.push("u2", probability(&[(p.clone(), "v2"), (one() - p, "v3")]));
            s.push("u3", probability(&[(q.clone(), "v5"), (one() - q, "v4")]));
            for o in ["v2", "v3", "v4", "v5"] {
                s.push(o, NodeKind::Outcome);
            }
            ("choose_probabilities", vec!["v2", "v5"])
        }
        ParadigmId::HesitationI(p) => {
            check_unit("p", p)?;
            s.push("v1", decision("i", None, &[("rescue", "v2"), ("hesitate", "v3")]));
            s.push("v2", NodeKind::Outcome);
            s.push("v3", probability(&[(p.clone(), "v4"), (one() - p, "v6")]));
            s.push("v4", decision("i", None, &[("rescue", "v7"), ("pass", "v5")]));
            for o in ["v5", "v6", "v7"] {
                s.push(o, NodeKind::Outcome);
            }
            ("hesitation_1", vec!["v5", "v6"])
        }
        ParadigmId::HesitationII => {
            s.push("v1", decision("i", None, &[("rescue", "v2"), ("hesitate", "v3")]));
            s.push("v2", NodeKind::Outcome);
            s.push("v3", decision("i", None, &[("help", "v4"), ("pass", "v7")]));
            s.push("v4", ambiguity(&["v5", "v6"]));
            for o in ["v5", "v6", "v7"] {
                s.push(o, NodeKind::Outcome);
            }
            ("hesitation_2", vec!["v6", "v7"])
        }
        ParadigmId::ClimateNoLearning => {
            s.push("0", ambiguity(&["4", "5"]));
            s.push("4", decision("i", Some("world"), &[("heat", "10"), ("no_heat", "9")]));
            s.push("5", decision("i", Some("world"), &[("heat", "12"), ("no_heat", "11")]));
            for o in ["9", "10", "11", "12"] {
                s.push(o, NodeKind::Outcome);
            }
            ("climate_no_learning", vec!["10", "11"])
        }
        ParadigmId::ClimateWithLearning => {
            s.push("0", ambiguity(&["1", "2"]));
            s.push("1", decision("i", Some("pre"), &[("learn", "3"), ("pass", "4")]));
            s.push("2", decision("i", Some("pre"), &[("learn", "6"), ("pass", "5")]));
            s.push("3", decision("i", None, &[("heat", "8"), ("no_heat", "7")]));
            s.push("4", decision("i", Some("world"), &[("heat", "10"), ("no_heat", "9")]));
            s.push("5", decision("i", Some("world"), &[("heat", "12"), ("no_heat", "11")]));
            s.push("6", decision("i", None, &[("heat", "14"), ("no_heat", "13")]));
            for o in ["7", "8", "9", "10", "11", "12", "13", "14"] {
                s.push(o, NodeKind::Outcome);
            }
            ("climate_with_learning", vec!["8", "10", "11", "13"])
        }
        ParadigmId::AmbiguityAversion(p) => {
            check_unit("p", p)?;
            s.push("v1", decision("i", None, &[("ambiguous", "v2"), ("risky", "v5")]));
            s.push("v2", ambiguity(&["v3", "v4"]));
            s.push("v3", NodeKind::Outcome);
            s.push("v4", NodeKind::Outcome);
            s.push("v5", probability(&[(p.clone(), "v6"), (one() - p, "v7")]));
            s.push("v6", NodeKind::Outcome);
            s.push("v7", NodeKind::Outcome);
            ("ambiguity_aversion", vec!["v4", "v6"])
        }
    };
    let tree = validate(&s).expect("canonical tree is valid");
    Ok(TreeDocument::new(name, tree, Event::of(event)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int, zero};
    use crate::resp::{evaluate, Direction, VariantId};
    use crate::tree::Group;

    fn val(doc: &TreeDocument, variant: VariantId, dir: Direction, node: &str) -> Rat {
        evaluate(&doc.tree, &doc.event, &Group::single("i"), variant, dir, &NodeId::new(node))
            .unwrap()
            .value
    }

    #[test]
    fn load_and_shoot_counterfactual_pattern() {
        let doc = build_paradigmatic(&ParadigmId::LoadAndShoot).unwrap();
        // shot fired, gun unloaded: variants 2-4 assign 1, variants 0-1 zero
        for (variant, expect) in [
            (VariantId::V0, 0),
            (VariantId::V1, 0),
            (VariantId::V2, 1),
            (VariantId::V3, 1),
            (VariantId::V4, 1),
        ] {
            assert_eq!(
                val(&doc, variant, Direction::Backward, "v4"),
                rat_int(expect),
                "variant {variant} at v4"
            );
        }
        // shot fired, gun loaded: every variant assigns 1
        for variant in [VariantId::V0, VariantId::V1, VariantId::V2, VariantId::V3, VariantId::V4] {
            assert_eq!(val(&doc, variant, Direction::Backward, "v6"), one(), "variant {variant} at v6");
        }
        // forward at the unloaded node: variant 1 excuses, 2-4 do not
        assert_eq!(val(&doc, VariantId::V1, Direction::Forward, "v1"), zero());
        for variant in [VariantId::V2, VariantId::V3, VariantId::V4] {
            assert_eq!(val(&doc, variant, Direction::Forward, "v1"), one());
        }
        // forward at the loaded node: all graded variants assign 1
        for variant in VariantId::GRADED {
            assert_eq!(val(&doc, variant, Direction::Forward, "v2"), one());
        }
    }

    #[test]
    fn rock_throwing_multicausal_pattern() {
        let doc = build_paradigmatic(&ParadigmId::RockThrowing).unwrap();
        for (variant, expect) in [
            (VariantId::V1, 1),
            (VariantId::V2, 0),
            (VariantId::V3, 1),
            (VariantId::V4, 1),
        ] {
            assert_eq!(
                val(&doc, variant, Direction::Backward, "v6"),
                rat_int(expect),
                "variant {variant} at v6"
            );
        }
        // forward: v1 (the other kept still) and v2 (the window is doomed)
        assert_eq!(val(&doc, VariantId::V1, Direction::Forward, "v1"), one());
        assert_eq!(val(&doc, VariantId::V1, Direction::Forward, "v2"), zero());
        assert_eq!(val(&doc, VariantId::V2, Direction::Forward, "v1"), zero());
        assert_eq!(val(&doc, VariantId::V2, Direction::Forward, "v2"), zero());
        for variant in [VariantId::V3, VariantId::V4] {
            assert_eq!(val(&doc, variant, Direction::Forward, "v1"), one());
            assert_eq!(val(&doc, variant, Direction::Forward, "v2"), one());
        }
    }

    #[test]
    fn choose_probabilities_normalization() {
        let doc =
            build_paradigmatic(&ParadigmId::ChooseProbabilities(zero(), one())).unwrap();
        for variant in VariantId::GRADED {
            assert_eq!(val(&doc, variant, Direction::Forward, "v1"), one(), "rf {variant}");
            assert_eq!(val(&doc, variant, Direction::Backward, "v5"), one(), "rb(v5) {variant}");
            assert_eq!(val(&doc, variant, Direction::Backward, "v2"), zero(), "rb(v2) {variant}");
        }
        // graded difference for p=1/3, q=2/3 under variant 1
        let doc = build_paradigmatic(&ParadigmId::ChooseProbabilities(rat(1, 3), rat(2, 3))).unwrap();
        assert_eq!(val(&doc, VariantId::V1, Direction::Backward, "v5"), rat(1, 3));
    }

    #[test]
    fn hesitation_one_orders_aberrations() {
        let doc = build_paradigmatic(&ParadigmId::HesitationI(rat(1, 2))).unwrap();
        for variant in VariantId::GRADED {
            let late = val(&doc, variant, Direction::Backward, "v5");
            let early = val(&doc, variant, Direction::Backward, "v6");
            assert!(late > early, "variant {variant}: {late} <= {early}");
        }
    }

    #[test]
    fn climate_without_learning_values() {
        let doc = build_paradigmatic(&ParadigmId::ClimateNoLearning).unwrap();
        for node in ["4", "5"] {
            assert_eq!(val(&doc, VariantId::V3, Direction::Forward, node), one());
            assert_eq!(val(&doc, VariantId::V2, Direction::Forward, node), zero());
        }
        for node in ["10", "11"] {
            assert_eq!(val(&doc, VariantId::V3, Direction::Backward, node), one());
            assert_eq!(val(&doc, VariantId::V0, Direction::Backward, node), one());
            assert_eq!(val(&doc, VariantId::V2, Direction::Backward, node), zero());
        }
        for node in ["9", "12"] {
            assert_eq!(val(&doc, VariantId::V3, Direction::Backward, node), one());
            assert_eq!(val(&doc, VariantId::V2, Direction::Backward, node), zero());
            assert_eq!(val(&doc, VariantId::V0, Direction::Backward, node), zero());
        }
    }

    #[test]
    fn climate_with_learning_values() {
        let doc = build_paradigmatic(&ParadigmId::ClimateWithLearning).unwrap();
        for node in ["1", "2"] {
            assert_eq!(val(&doc, VariantId::V2, Direction::Forward, node), one());
            assert_eq!(val(&doc, VariantId::V3, Direction::Forward, node), one());
        }
        // learning does not change the assessment inside the unlearned set
        for node in ["4", "5"] {
            assert_eq!(val(&doc, VariantId::V2, Direction::Forward, node), zero());
            assert_eq!(val(&doc, VariantId::V3, Direction::Forward, node), one());
        }
        for node in ["8", "9", "10", "11", "12", "13"] {
            assert_eq!(val(&doc, VariantId::V2, Direction::Backward, node), one(), "rb2({node})");
            assert_eq!(val(&doc, VariantId::V3, Direction::Backward, node), one(), "rb3({node})");
        }
        for node in ["7", "14"] {
            assert_eq!(val(&doc, VariantId::V2, Direction::Backward, node), zero());
            assert_eq!(val(&doc, VariantId::V3, Direction::Backward, node), zero());
        }
        for node in ["7", "8", "9", "10", "11", "12", "13", "14"] {
            let expect = matches!(node, "8" | "10" | "11" | "13");
            assert_eq!(
                val(&doc, VariantId::V0, Direction::Backward, node),
                crate::rat::indicator(expect),
                "rb0({node})"
            );
        }
    }

    #[test]
    fn ambiguity_aversion_splits_variants_one_and_two() {
        let p = rat(1, 2);
        let doc = build_paradigmatic(&ParadigmId::AmbiguityAversion(p.clone())).unwrap();
        let tree = &doc.tree;
        let g = Group::single("i");
        let eval = crate::engine::Evaluator::new(tree, &g, &doc.event);
        // variant 1: the ambiguous course does not raise the guaranteed
        // likelihood, the risky one does
        let gamma_root = eval.gamma(&NodeId::new("v1")).unwrap();
        assert_eq!(eval.gamma(&NodeId::new("v2")).unwrap() - &gamma_root, zero());
        assert_eq!(eval.gamma(&NodeId::new("v5")).unwrap() - &gamma_root, p.clone());
        // variant 2: the risky course drops the minimax likelihood to p
        let mu_root = eval.mu(&NodeId::new("v1")).unwrap();
        assert_eq!(mu_root, p);
        assert_eq!(eval.mu(&NodeId::new("v2")).unwrap(), one());
        assert_eq!(eval.mu(&NodeId::new("v5")).unwrap(), p);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(build_paradigmatic(&ParadigmId::HesitationI(rat(3, 2))).is_err());
        assert!(build_paradigmatic(&ParadigmId::ChooseProbabilities(rat(-1, 2), one())).is_err());
    }
}
