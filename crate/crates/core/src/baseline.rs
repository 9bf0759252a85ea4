//! The baseline recommender: deterministic top-N by relevance, and the
//! demand, entropy and cost it induces.

use crate::catalog::{CostVector, RelevanceMatrix};
use crate::demand::{
    entropy_of_demand, expected_cost, stationary_demand, DemandDistribution, RecommendationPolicy,
};
use crate::error::{Error, Result};

/// Top-N policy per row (ties go to the lower index) and the per-row
/// quality ceiling `q_max_i`.
pub fn build_bsr(u: &RelevanceMatrix, n: usize) -> Result<(RecommendationPolicy, Vec<f64>)> {
    let k = u.k();
    if n == 0 || k < n + 1 {
        return Err(Error::Config(format!(
            "cannot recommend {n} items from a catalog of {k}"
        )));
    }
    let mut rows = vec![0.0; k * k];
    let mut q_max = Vec::with_capacity(k);
    for i in 0..k {
        let row = u.row(i);
        let mut order: Vec<usize> = (0..k).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        for &j in &order[..n] {
            rows[i * k + j] = 1.0;
        }
        // Summed in index order so it equals Σ_j r_ij u_ij bit for bit.
        q_max.push(rows[i * k..(i + 1) * k].iter().zip(row).map(|(r, s)| r * s).sum());
    }
    Ok((RecommendationPolicy::new(k, n, rows)?, q_max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineProfile {
    pub relevance: RelevanceMatrix,
    pub p0: DemandDistribution,
    pub alpha: f64,
    pub policy: RecommendationPolicy,
    pub q_max: Vec<f64>,
    pub demand_bs: DemandDistribution,
    pub entropy_bs: f64,
    pub costs: CostVector,
    pub cost_bs: f64,
}

impl BaselineProfile {
    pub fn k(&self) -> usize {
        self.policy.k()
    }

    pub fn n(&self) -> usize {
        self.policy.n()
    }

    /// `i,q_max,p_bs` (1-based `i`) followed by a `# entropy_bs=…,cost_bs=…` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,q_max,p_bs\n");
        for (i, (q, p)) in self.q_max.iter().zip(self.demand_bs.as_slice()).enumerate() {
            out.push_str(&format!("{},{q},{p}\n", i + 1));
        }
        out.push_str(&format!("# entropy_bs={},cost_bs={}\n", self.entropy_bs, self.cost_bs));
        out
    }
}

/// The baseline demand needs costs to report `cost_bs`, but the binary cost
/// model needs the baseline demand to pick the cache. [`profile_with_cache`]
/// does both in order.
pub fn build_baseline_profile(
    u: &RelevanceMatrix,
    n: usize,
    p0: &DemandDistribution,
    alpha: f64,
    costs: &CostVector,
) -> Result<BaselineProfile> {
    if p0.len() != u.k() || costs.len() != u.k() {
        return Err(Error::Shape(format!(
            "relevance is {0}x{0}, p0 has {1} items, costs have {2}",
            u.k(),
            p0.len(),
            costs.len()
        )));
    }
    let (policy, q_max) = build_bsr(u, n)?;
    let demand_bs = stationary_demand(p0, &policy, alpha)?;
    let entropy_bs = entropy_of_demand(&demand_bs);
    let cost_bs = expected_cost(&demand_bs, costs)?;
    Ok(BaselineProfile {
        relevance: u.clone(),
        p0: p0.clone(),
        alpha,
        policy,
        q_max,
        demand_bs,
        entropy_bs,
        costs: costs.clone(),
        cost_bs,
    })
}

/// Baseline profile with binary costs: the `cache_size` items with the
/// highest baseline demand cost 0.
pub fn profile_with_cache(
    u: &RelevanceMatrix,
    n: usize,
    p0: &DemandDistribution,
    alpha: f64,
    cache_size: usize,
) -> Result<BaselineProfile> {
    let (policy, _) = build_bsr(u, n)?;
    let demand_bs = stationary_demand(p0, &policy, alpha)?;
    let costs = crate::catalog::build_costs(
        &demand_bs,
        cache_size,
        crate::catalog::CostMode::Binary,
        None,
    )?;
    build_baseline_profile(u, n, p0, alpha, &costs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::synth_relevance;
    use crate::demand::entropy_of_policy_row;

    fn one_row(row: [f64; 4], n: usize) -> (Vec<f64>, f64) {
        let mut dense = vec![0.0; 16];
        dense[..4].copy_from_slice(&row);
        for i in 1..4 {
            dense[i * 4 + (i + 1) % 4] = 1.0;
        }
        let u = RelevanceMatrix::from_dense(4, dense).unwrap();
        let (pol, q) = build_bsr(&u, n).unwrap();
        (pol.row(0).to_vec(), q[0])
    }

    #[test]
    fn picks_top_n() {
        let (r, q) = one_row([0.0, 0.9, 0.7, 0.6], 2);
        assert_eq!(r, vec![0.0, 1.0, 1.0, 0.0]);
        assert!((q - 1.6).abs() < 1e-15);
    }

    #[test]
    fn all_zero_row_uses_lowest_indices() {
        let (r, q) = one_row([0.0; 4], 2);
        assert_eq!(r, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(q, 0.0);
    }

    #[test]
    fn ties_break_by_index() {
        let (r, q) = one_row([0.0, 0.8, 0.8, 0.5], 2);
        assert_eq!(r, vec![0.0, 1.0, 1.0, 0.0]);
        assert!((q - 1.6).abs() < 1e-15);
    }

    #[test]
    fn too_many_recommendations() {
        let u = RelevanceMatrix::from_dense(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(build_bsr(&u, 2), Err(Error::Config(_))));
    }

    #[test]
    fn two_item_profile() {
        let u = RelevanceMatrix::from_dense(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let p0 = DemandDistribution::new(vec![1.0, 0.0]).unwrap();
        let c = CostVector::new(vec![0.0, 1.0]).unwrap();
        let prof = build_baseline_profile(&u, 1, &p0, 0.5, &c).unwrap();
        assert!((prof.demand_bs.as_slice()[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((prof.cost_bs - 1.0 / 3.0).abs() < 1e-12);
        assert!(prof.to_csv().starts_with("i,q_max,p_bs\n1,1,"));
    }

    #[test]
    fn tiny_alpha_keeps_direct_demand() {
        let u = synth_relevance(8, 0.5, 3).unwrap();
        let p0 = crate::catalog::zipf_direct_demand(8, 1.0).unwrap();
        let c = CostVector::new(vec![0., 1., 0., 1., 1., 0., 1., 1.]).unwrap();
        let prof = build_baseline_profile(&u, 2, &p0, 0.001, &c).unwrap();
        let direct = expected_cost(&p0, &c).unwrap();
        assert!((prof.cost_bs - direct).abs() < 0.01);
        assert!(prof.demand_bs.total_variation(&p0) < 0.01);
    }

    #[test]
    fn profile_scalars_recompute_exactly() {
        let u = synth_relevance(12, 0.4, 9).unwrap();
        let p0 = crate::catalog::zipf_direct_demand(12, 0.7).unwrap();
        let prof = profile_with_cache(&u, 3, &p0, 0.8, 4).unwrap();
        assert_eq!(prof.entropy_bs, entropy_of_demand(&prof.demand_bs));
        assert_eq!(prof.cost_bs, expected_cost(&prof.demand_bs, &prof.costs).unwrap());
        assert_eq!(prof.costs.cached().len(), 4);
        for i in 0..12 {
            assert_eq!(entropy_of_policy_row(&prof.policy, i), 0.0);
        }
    }
}
