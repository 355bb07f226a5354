mod support;

use support::oracle;

#[test]
fn graph_stage_matches_brute_force() {
    oracle::graph_equivalence(0x5eed, 200).unwrap();
    oracle::graph_equivalence(17, 200).unwrap();
}

#[test]
fn evaluate_matches_brute_force() {
    oracle::evaluate_equivalence(0xe7a1, 100).unwrap();
}
