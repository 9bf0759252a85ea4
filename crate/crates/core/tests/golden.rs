use nfr::catalog::{parse_relevance, synth_relevance};

const GOLDEN: &str = include_str!("data/synth_k4_d05_s1.csv");

#[test]
fn synthetic_relevance_is_stable() {
    let u = synth_relevance(4, 0.5, 1).unwrap();
    assert_eq!(u.to_dense_csv(), GOLDEN);
}

#[test]
fn dense_dump_round_trips() {
    let u = parse_relevance(GOLDEN, 0.0).unwrap();
    assert_eq!(u, synth_relevance(4, 0.5, 1).unwrap());
}
