use respcalc_core::tree::validate;
fn main() {
    // reproduce the invalid spec by calling the internal builder through
    // verify (m=1, n=3) and printing violations via a tiny copy of the flow
    let p = respcalc_core::scenarios::VotingParams { n: 3, m: 1, u: 1, ..Default::default() };
    let _ = validate; // silence
    let result = std::panic::catch_unwind(|| {
        respcalc_core::scenarios::build_voting_tree(respcalc_core::scenarios::MethodId::SimpleRunoff, &p)
    });
    println!("{result:?}");
}
