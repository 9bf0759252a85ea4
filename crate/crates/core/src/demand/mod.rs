//! Long-run content demand under a recommendation policy, its cost and
//! entropy, and a Monte-Carlo session simulator that cross-checks them.
//!
//! All entropies use the natural logarithm and `0 ln 0 = 0`.

mod simulate;

use nalgebra::{DMatrix, DVector};

pub use simulate::{
    simulate_sessions, simulate_traces, systematic_sample, trace_csv, ChoiceMode, SessionTrace, SimulationConfig,
    SimulationResult,
};

use crate::catalog::CostVector;
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-9;
/// Tolerance on policy row sums.
pub const ROW_SUM_TOL: f64 = 1e-6;

/// Probability vector over the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandDistribution(Vec<f64>);

impl DemandDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("empty distribution".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::Domain(format!("probability {p} is negative or not finite")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::Domain(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(DemandDistribution(probs))
    }

    /// Scale non-negative weights to sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Domain("weights must be non-negative with positive sum".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// Accept a numerically computed distribution, clipping round-off
    /// negatives (above `-1e-9`) to zero.
    pub fn from_numeric(mut probs: Vec<f64>) -> Result<Self> {
        for p in probs.iter_mut() {
            if *p < 0.0 && *p > -SUM_TOL {
                *p = 0.0;
            }
        }
        Self::new(probs)
    }

    pub fn uniform(k: usize) -> Self {
        DemandDistribution(vec![1.0 / k as f64; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total-variation distance `½ Σ |p - q|`.
    pub fn total_variation(&self, other: &DemandDistribution) -> f64 {
        0.5 * self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// `K x K` recommendation probabilities; row `i` sums to `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationPolicy {
    k: usize,
    n: usize,
    rows: Vec<f64>,
}

impl RecommendationPolicy {
    pub fn new(k: usize, n: usize, rows: Vec<f64>) -> Result<Self> {
        if rows.len() != k * k {
            return Err(Error::Shape(format!("policy needs {} entries, got {}", k * k, rows.len())));
        }
        for i in 0..k {
            let row = &rows[i * k..(i + 1) * k];
            if row[i] != 0.0 {
                return Err(Error::Domain(format!("r[{i}][{i}] = {} must be 0", row[i])));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Domain(format!("row {i}: entry {v} outside [0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - n as f64).abs() > ROW_SUM_TOL {
                return Err(Error::Domain(format!("row {i} sums to {sum}, expected {n}")));
            }
        }
        Ok(RecommendationPolicy { k, n, rows })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of recommendations per list.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.k..(i + 1) * self.k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rows
    }

    /// `I - (α/N) R` as a dense matrix.
    fn transition_system(&self, alpha: f64) -> DMatrix<f64> {
        let k = self.k;
        let scale = alpha / self.n as f64;
        DMatrix::from_fn(k, k, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - scale * self.rows[i * k + j]
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("alpha = {alpha} outside (0,1)")))
    }
}

/// `p = (1-α) p0ᵀ (I - (α/N) R)⁻¹`, by dense LU with partial pivoting.
pub fn stationary_demand(
    p0: &DemandDistribution,
    policy: &RecommendationPolicy,
    alpha: f64,
) -> Result<DemandDistribution> {
    check_alpha(alpha)?;
    if p0.len() != policy.k() {
        return Err(Error::Shape(format!(
            "p0 has {} items, policy has {}",
            p0.len(),
            policy.k()
        )));
    }
    // pᵀ A = (1-α) p0ᵀ  <=>  Aᵀ p = (1-α) p0
    let system = policy.transition_system(alpha).transpose();
    let rhs = DVector::from_iterator(p0.len(), p0.as_slice().iter().map(|v| (1.0 - alpha) * v));
    let sol = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular demand system".into()))?;
    DemandDistribution::from_numeric(sol.iter().copied().collect())
}

/// Expected session cost computed from the policy side:
/// `(1-α) p0ᵀ v` with `(I - (α/N) R) v = c`.
pub fn session_cost(
    p0: &DemandDistribution,
    policy: &RecommendationPolicy,
    alpha: f64,
    costs: &CostVector,
) -> Result<f64> {
    check_alpha(alpha)?;
    if costs.len() != policy.k() || p0.len() != policy.k() {
        return Err(Error::Shape("cost, demand and policy sizes differ".into()));
    }
    let rhs = DVector::from_column_slice(costs.as_slice());
    let v = policy
        .transition_system(alpha)
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular demand system".into()))?;
    Ok((1.0 - alpha) * p0.as_slice().iter().zip(v.iter()).map(|(p, c)| p * c).sum::<f64>())
}

/// `cᵀ p`.
pub fn expected_cost(p: &DemandDistribution, costs: &CostVector) -> Result<f64> {
    if p.len() != costs.len() {
        return Err(Error::Shape(format!(
            "demand has {} items, costs have {}",
            p.len(),
            costs.len()
        )));
    }
    Ok(p.as_slice().iter().zip(costs.as_slice()).map(|(a, b)| a * b).sum())
}

/// `x ln x` with the continuous extension `0 ln 0 = 0`.
pub fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

pub fn entropy_of_demand(p: &DemandDistribution) -> f64 {
    -p.as_slice().iter().map(|&v| xlnx(v)).sum::<f64>()
}

/// Row entropy `-Σ_j r_ij ln r_ij` of the recommendation matrix.
pub fn entropy_of_policy_row(policy: &RecommendationPolicy, i: usize) -> f64 {
    -policy.row(i).iter().map(|&v| xlnx(v)).sum::<f64>()
}
