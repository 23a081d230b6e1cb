use respcalc_core::scenarios::{verify_table2, MethodId};

fn probe(m: MethodId, n: u32) {
    let report = verify_table2(&[m], &[n]);
    println!(
        "{} N={}: cells={} points={} mismatches={}",
        m.name(),
        n,
        report.rows.len(),
        report.checked_count(),
        report.mismatch_count()
    );
    for r in &report.rows {
        for w in &r.mismatches {
            println!("  {:?}/{}/{:?}/{:?} m={}: {}", r.key.variant, r.key.n, r.key.direction, r.key.round, r.key.m, w);
        }
    }
}

#[test]
fn probe_two_option() { probe(MethodId::TwoOptionMajority, 3); }
#[test]
fn probe_dictator() { probe(MethodId::RandomDictator, 3); }
#[test]
fn probe_multi() { probe(MethodId::MultiOptionMajority, 3); }
#[test]
fn probe_approval() { probe(MethodId::Approval, 3); }
#[test]
fn probe_consensus() { probe(MethodId::ConsensusOrRandomDictator, 3); }
#[test]
fn probe_median() { probe(MethodId::MedianEmissionsCap, 3); }
#[test]
fn probe_poll() { probe(MethodId::PollThenMajority, 3); }
#[test]
fn probe_amendment() { probe(MethodId::AmendmentThenMajority, 3); }
#[test]
fn probe_runoff() { probe(MethodId::SimpleRunoff, 3); }
