mod common;

use common::{agrees, build_lp, LpSpec};
use nfr::lp::{read_mps, solve, vertex_oracle, write_mps_string, MpsFormat, SolveOptions};
use proptest::prelude::*;

fn lp_spec() -> impl Strategy<Value = LpSpec> {
    (1usize..=6, 0usize..=8).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-3i32..=3, n * m),
            prop::collection::vec(0u8..3, m),
            prop::collection::vec(-6i32..=6, m),
            prop::collection::vec(-3i32..=3, n),
            prop::collection::vec(0u8..4, n),
        )
            .prop_map(move |(rows, rels, rhs, obj, bounds)| LpSpec {
                n,
                rows,
                rels,
                rhs,
                obj,
                bounds,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplex_matches_vertex_enumeration(spec in lp_spec()) {
        let lp = build_lp(&spec);
        let report = solve(&lp, &SolveOptions::default());
        let oracle = vertex_oracle(&lp).unwrap();
        prop_assert!(agrees(&report, oracle, 1e-7).is_ok(), "{:?}", agrees(&report, oracle, 1e-7));
        if report.is_optimal() {
            prop_assert!(report.max_constraint_violation <= 1e-7);
        }
    }

    #[test]
    fn feasible_points_never_beat_the_optimum(spec in lp_spec(), x in prop::collection::vec(-2i32..=2, 6)) {
        // Move each right-hand side so the integer point x is feasible.
        let mut spec = spec;
        let x: Vec<f64> = (0..spec.n)
            .map(|j| match spec.bounds[j] {
                0 | 1 => x[j].clamp(0, 2) as f64,
                _ => x[j] as f64,
            })
            .collect();
        for r in 0..spec.rels.len() {
            let act: f64 = (0..spec.n).map(|j| spec.rows[r * spec.n + j] as f64 * x[j]).sum();
            let act = act as i32;
            spec.rhs[r] = match spec.rels[r] {
                0 => act.max(spec.rhs[r]),
                1 => act,
                _ => act.min(spec.rhs[r]),
            };
        }
        let lp = build_lp(&spec);
        prop_assert!(lp.max_violation(&x) == 0.0);
        let report = solve(&lp, &SolveOptions::default());
        prop_assert!(report.status != nfr::lp::SolveStatus::Infeasible);
        if report.is_optimal() {
            prop_assert!(lp.objective_value(&x) >= report.objective_value - 1e-7);
        }
    }

    #[test]
    fn free_mps_round_trip_keeps_the_optimum(spec in lp_spec()) {
        let lp = build_lp(&spec);
        let text = write_mps_string(&lp, MpsFormat::Free).unwrap();
        let back = read_mps(&text).unwrap();
        let a = solve(&lp, &SolveOptions::default());
        let b = solve(&back, &SolveOptions::default());
        prop_assert_eq!(a.status, b.status);
        if a.is_optimal() {
            prop_assert!((a.objective_value - b.objective_value).abs() < 1e-9);
        }
    }

    #[test]
    fn solving_is_deterministic(spec in lp_spec()) {
        let lp = build_lp(&spec);
        let opts = SolveOptions::default();
        prop_assert_eq!(solve(&lp, &opts), solve(&lp, &opts));
    }
}
