#![allow(dead_code)]

use nfr::baseline::BaselineProfile;
use nfr::bench::{scenario_profile, synthetic_relevance};
use nfr::catalog::ScenarioConfig;
use nfr::lp::{Bounds, LinearProgram, OracleOutcome, Relation, SolveReport, SolveStatus};
use rand::Rng;

/// Small integer LP: `rows` is `m × n` row-major.
#[derive(Debug, Clone)]
pub struct LpSpec {
    pub n: usize,
    pub rows: Vec<i32>,
    pub rels: Vec<u8>,
    pub rhs: Vec<i32>,
    pub obj: Vec<i32>,
    /// 0: `[0,∞)`, 1: `[0,2]`, 2: free, 3: `[-2,3]`.
    pub bounds: Vec<u8>,
}

pub fn random_lp_spec(rng: &mut impl Rng) -> LpSpec {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=8);
    LpSpec {
        n,
        rows: (0..n * m).map(|_| rng.gen_range(-3..=3)).collect(),
        rels: (0..m).map(|_| rng.gen_range(0..3)).collect(),
        rhs: (0..m).map(|_| rng.gen_range(-6..=6)).collect(),
        obj: (0..n).map(|_| rng.gen_range(-3..=3)).collect(),
        bounds: (0..n).map(|_| rng.gen_range(0..4)).collect(),
    }
}

pub fn build_lp(spec: &LpSpec) -> LinearProgram {
    let mut lp = LinearProgram::new();
    let x = lp.add_block("x", spec.n, Bounds::NONNEG).unwrap();
    for j in 0..spec.n {
        let b = match spec.bounds[j] {
            0 => Bounds::NONNEG,
            1 => Bounds::new(0.0, 2.0),
            2 => Bounds::FREE,
            _ => Bounds::new(-2.0, 3.0),
        };
        lp.set_bounds(x.index(j), b).unwrap();
        lp.set_objective(x.index(j), spec.obj[j] as f64).unwrap();
    }
    for (r, (&rel, &rhs)) in spec.rels.iter().zip(&spec.rhs).enumerate() {
        let coeffs = (0..spec.n)
            .map(|j| (x.index(j), spec.rows[r * spec.n + j] as f64))
            .collect();
        let relation = match rel {
            0 => Relation::LessEq,
            1 => Relation::Eq,
            _ => Relation::GreaterEq,
        };
        lp.add_constraint(format!("r{r}"), coeffs, relation, rhs as f64)
            .unwrap();
    }
    lp
}

/// Same status, and objectives within `tol` when optimal.
pub fn agrees(report: &SolveReport, oracle: OracleOutcome, tol: f64) -> Result<(), String> {
    match (report.status, oracle) {
        (SolveStatus::Optimal, OracleOutcome::Optimal(v)) => {
            if (report.objective_value - v).abs() <= tol {
                Ok(())
            } else {
                Err(format!("objective {} vs oracle {v}", report.objective_value))
            }
        }
        (SolveStatus::Infeasible, OracleOutcome::Infeasible)
        | (SolveStatus::Unbounded, OracleOutcome::Unbounded) => Ok(()),
        (s, o) => Err(format!("status {s} vs oracle {o:?}")),
    }
}

/// Synthetic instance with the given shape and seed.
pub fn instance(
    k: usize,
    n: usize,
    c: usize,
    alpha: f64,
    q: f64,
    seed: u64,
) -> (ScenarioConfig, BaselineProfile) {
    let cfg = ScenarioConfig {
        k,
        n,
        c,
        alpha,
        q,
        seed,
        ..ScenarioConfig::default()
    };
    let u = synthetic_relevance(&cfg).unwrap();
    let prof = scenario_profile(&cfg, &u).unwrap();
    (cfg, prof)
}

/// Random fractional policy: row `i` is `min(1, t·w_ij)` with random
/// weights and `t` chosen by bisection so the row sums to `n`.
pub fn random_policy(rng: &mut impl Rng, k: usize, n: usize) -> nfr::demand::RecommendationPolicy {
    let mut rows = vec![0.0; k * k];
    for i in 0..k {
        let w: Vec<f64> = (0..k)
            .map(|j| if j == i { 0.0 } else { rng.gen_range(0.01..1.0) })
            .collect();
        let sum = |t: f64| w.iter().map(|x| (t * x).min(1.0)).sum::<f64>();
        let (mut lo, mut hi) = (0.0, 1e4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sum(mid) < n as f64 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for j in 0..k {
            rows[i * k + j] = (hi * w[j]).min(1.0);
        }
    }
    nfr::demand::RecommendationPolicy::new(k, n, rows).unwrap()
}

/// `(1-α) Σ_t p0ᵀ (αR/N)^t`, summed until the term is negligible.
pub fn geometric_demand(p0: &[f64], policy: &nfr::demand::RecommendationPolicy, alpha: f64) -> Vec<f64> {
    let k = p0.len();
    let scale = alpha / policy.n() as f64;
    let mut term: Vec<f64> = p0.iter().map(|v| (1.0 - alpha) * v).collect();
    let mut total = term.clone();
    for _ in 0..100_000 {
        let mut next = vec![0.0; k];
        for i in 0..k {
            if term[i] == 0.0 {
                continue;
            }
            for (j, r) in policy.row(i).iter().enumerate() {
                next[j] += term[i] * scale * r;
            }
        }
        let mass: f64 = next.iter().sum();
        for (t, x) in total.iter_mut().zip(&next) {
            *t += x;
        }
        term = next;
        if mass < 1e-17 {
            break;
        }
    }
    total
}
