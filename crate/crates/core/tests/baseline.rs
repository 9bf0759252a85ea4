use nfr::baseline::build_bsr;
use nfr::catalog::RelevanceMatrix;
use proptest::prelude::*;

/// Best score sum over all `n`-subsets of the off-diagonal items.
fn best_subset(row: &[f64], i: usize, n: usize) -> f64 {
    let items: Vec<usize> = (0..row.len()).filter(|&j| j != i).collect();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << items.len()) {
        if mask.count_ones() as usize == n {
            let s: f64 = (0..items.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| row[items[b]])
                .sum();
            best = best.max(s);
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn top_n_rows_are_optimal(
        k in 3usize..=12,
        n_frac in 0.0f64..1.0,
        scores in prop::collection::vec(prop_oneof![Just(0.0), 0.5f64..=1.0], 144),
    ) {
        let n = 1 + ((k - 2) as f64 * n_frac) as usize;
        let mut dense: Vec<f64> = scores[..k * k].to_vec();
        for i in 0..k {
            dense[i * k + i] = 0.0;
        }
        let u = RelevanceMatrix::from_dense(k, dense).unwrap();
        let (policy, q_max) = build_bsr(&u, n).unwrap();
        for i in 0..k {
            let row = policy.row(i);
            prop_assert_eq!(row.iter().filter(|&&r| r == 1.0).count(), n);
            prop_assert_eq!(row[i], 0.0);
            let q: f64 = row.iter().zip(u.row(i)).map(|(r, s)| r * s).sum();
            prop_assert_eq!(q, q_max[i]);
            prop_assert!(best_subset(u.row(i), i, n) <= q_max[i] + 1e-12);
        }
    }
}
