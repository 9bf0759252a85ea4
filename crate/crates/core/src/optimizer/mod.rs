//! Network-friendly recommendation programs.
//!
//! Instead of optimizing the policy `R` directly, the programs work with
//! the joint flows `f_ij = r_ij · p_i`, which turns the bilinear demand
//! balance into linear rows. The entropy floor on the resulting demand is
//! linearized with a [`CutFamily`], and fairness toward the baseline demand
//! is expressed with an optional [`FairnessSpec`] block.
//!
//! Variable blocks are named `f` (`K²`, row-major, diagonal fixed at 0),
//! `p` (`K`), `d` (`K`, entropy surrogates) and `z` (`K`, fairness
//! auxiliaries). Every builder is deterministic: the same inputs give the
//! same rows in the same order.

mod cuts;
mod fairness;

pub use cuts::{make_cuts, CutFamily, CutLine, CutMode, UnknownName, DEFAULT_EXP_STEP};
pub use fairness::{fairness_metrics, FairnessKind, FairnessMetrics, FairnessSpec};

use crate::baseline::BaselineProfile;
use crate::catalog::ScenarioConfig;
use crate::demand::{
    entropy_of_demand, expected_cost, session_cost, stationary_demand, DemandDistribution,
    RecommendationPolicy,
};
use crate::error::{Error, Result};
use crate::lp::{solve, Bounds, LinearProgram, Relation, SolveOptions, SolveReport};

/// Rows whose demand falls below this use the baseline recommendations.
pub const MIN_ROW_DEMAND: f64 = 1e-12;

fn check_profile(profile: &BaselineProfile, cfg: &ScenarioConfig) -> Result<()> {
    if profile.k() != cfg.k || profile.n() != cfg.n || profile.alpha != cfg.alpha {
        return Err(Error::Config(format!(
            "profile (K={}, N={}, alpha={}) does not match scenario (K={}, N={}, alpha={})",
            profile.k(),
            profile.n(),
            profile.alpha,
            cfg.k,
            cfg.n,
            cfg.alpha
        )));
    }
    if !(0.0..=1.0).contains(&cfg.q) || !(0.0..=1.0).contains(&cfg.b) {
        return Err(Error::Config("q and b must lie in [0,1]".into()));
    }
    Ok(())
}

fn build_program(
    profile: &BaselineProfile,
    cfg: &ScenarioConfig,
    cuts: Option<&CutFamily>,
    fair: Option<&FairnessSpec>,
) -> Result<LinearProgram> {
    check_profile(profile, cfg)?;
    let k = profile.k();
    let n = profile.n() as f64;
    let alpha = profile.alpha;
    let u = &profile.relevance;
    let mut lp = LinearProgram::new();
    let f = lp.add_block("f", k * k, Bounds::NONNEG)?;
    let p = lp.add_block("p", k, Bounds::NONNEG)?;
    let fv = |i: usize, j: usize| f.index(i * k + j);
    for i in 0..k {
        lp.set_bounds(fv(i, i), Bounds::fixed(0.0))?;
    }
    for (i, &c) in profile.costs.as_slice().iter().enumerate() {
        lp.set_objective(p.index(i), c)?;
    }

    for i in 0..k {
        let mut row: Vec<(usize, f64)> = (0..k)
            .filter(|&j| j != i)
            .map(|j| (fv(i, j), u.get(i, j)))
            .collect();
        row.push((p.index(i), -cfg.q * profile.q_max[i]));
        lp.add_constraint(format!("quality_{i}"), row, Relation::GreaterEq, 0.0)?;
    }
    for i in 0..k {
        let mut row: Vec<(usize, f64)> = (0..k).filter(|&j| j != i).map(|j| (fv(i, j), 1.0)).collect();
        row.push((p.index(i), -n));
        lp.add_constraint(format!("rowsum_{i}"), row, Relation::Eq, 0.0)?;
    }
    for i in 0..k {
        for j in 0..k {
            lp.add_constraint(
                format!("dom_{i}_{j}"),
                vec![(fv(i, j), 1.0), (p.index(i), -1.0)],
                Relation::LessEq,
                0.0,
            )?;
        }
    }
    for j in 0..k {
        let mut row = vec![(p.index(j), 1.0)];
        row.extend((0..k).filter(|&i| i != j).map(|i| (fv(i, j), -alpha / n)));
        lp.add_constraint(
            format!("balance_{j}"),
            row,
            Relation::Eq,
            (1.0 - alpha) * profile.p0.as_slice()[j],
        )?;
    }

    if let Some(cuts) = cuts {
        let d = lp.add_block("d", k, Bounds::FREE)?;
        lp.add_constraint(
            "entropy",
            (0..k).map(|i| (d.index(i), 1.0)).collect(),
            Relation::LessEq,
            -cfg.b * profile.entropy_bs,
        )?;
        for i in 0..k {
            for (m, line) in cuts.lines.iter().enumerate() {
                lp.add_constraint(
                    format!("cut_{i}_{m}"),
                    vec![(p.index(i), line.slope), (d.index(i), -1.0)],
                    Relation::LessEq,
                    -line.intercept,
                )?;
            }
        }
    }

    if let Some(fair) = fair {
        let p_bs = profile.demand_bs.as_slice();
        match fair.kind {
            FairnessKind::Max => {
                for i in 0..k {
                    lp.add_constraint(
                        format!("fmax_hi_{i}"),
                        vec![(p.index(i), 1.0)],
                        Relation::LessEq,
                        p_bs[i] + fair.c_f,
                    )?;
                    lp.add_constraint(
                        format!("fmax_lo_{i}"),
                        vec![(p.index(i), 1.0)],
                        Relation::GreaterEq,
                        p_bs[i] - fair.c_f,
                    )?;
                }
            }
            FairnessKind::Tv => {
                let z = lp.add_block("z", k, Bounds::NONNEG)?;
                for i in 0..k {
                    lp.add_constraint(
                        format!("tv_hi_{i}"),
                        vec![(p.index(i), 1.0), (z.index(i), -1.0)],
                        Relation::LessEq,
                        p_bs[i],
                    )?;
                    lp.add_constraint(
                        format!("tv_lo_{i}"),
                        vec![(p.index(i), -1.0), (z.index(i), -1.0)],
                        Relation::LessEq,
                        -p_bs[i],
                    )?;
                }
                lp.add_constraint(
                    "tv_budget",
                    (0..k).map(|i| (z.index(i), 1.0)).collect(),
                    Relation::LessEq,
                    fair.c_f,
                )?;
            }
            FairnessKind::Kl => {
                // z_i stands in for ln p_i, bounded above by tangents of ln.
                let z = lp.add_block("z", k, Bounds::FREE)?;
                for i in 0..k {
                    for m in 0..fair.m_kl {
                        let t = m as f64 * fair.step;
                        lp.add_constraint(
                            format!("kl_cut_{i}_{m}"),
                            vec![(z.index(i), 1.0), (p.index(i), -t.exp())],
                            Relation::LessEq,
                            -t - 1.0,
                        )?;
                    }
                }
                let self_info: f64 = p_bs.iter().map(|&v| crate::demand::xlnx(v)).sum();
                lp.add_constraint(
                    "kl_budget",
                    (0..k).map(|i| (z.index(i), p_bs[i])).collect(),
                    Relation::GreaterEq,
                    -(fair.c_f - self_info),
                )?;
            }
        }
    }
    Ok(lp)
}

/// Cost minimization under the quality floor only.
pub fn build_nfr_lp(profile: &BaselineProfile, cfg: &ScenarioConfig) -> Result<LinearProgram> {
    build_program(profile, cfg, None, None)
}

/// Adds the entropy floor `Σ d_i ≤ -b·H(p_bs)` and the cut rows
/// `a_m p_i + b_m ≤ d_i`.
pub fn build_diverse_lp(
    profile: &BaselineProfile,
    cfg: &ScenarioConfig,
    cuts: &CutFamily,
) -> Result<LinearProgram> {
    build_program(profile, cfg, Some(cuts), None)
}

pub fn build_fair_lp(
    profile: &BaselineProfile,
    cfg: &ScenarioConfig,
    fair: &FairnessSpec,
) -> Result<LinearProgram> {
    build_program(profile, cfg, None, Some(fair))
}

pub fn build_fair_diverse_lp(
    profile: &BaselineProfile,
    cfg: &ScenarioConfig,
    cuts: &CutFamily,
    fair: &FairnessSpec,
) -> Result<LinearProgram> {
    build_program(profile, cfg, Some(cuts), Some(fair))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiverseSolution {
    /// Joint flows, row-major `K×K`.
    pub f: Vec<f64>,
    pub p_nf: DemandDistribution,
    /// Entropy surrogates, tightened to the cut envelope at `p_nf`.
    pub d: Option<Vec<f64>>,
    pub policy: RecommendationPolicy,
    pub realized_entropy: f64,
    /// `-Σ d_i`; `None` for programs without an entropy floor.
    pub claimed_entropy: Option<f64>,
    pub entropy_gap: Option<f64>,
    pub cost: f64,
    pub cut_mode: Option<CutMode>,
    /// Rows that fell back to the baseline recommendations.
    pub fallback_rows: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
}

impl DiverseSolution {
    /// `i,j,f,r` for nonzero flows, then `i,p_nf,d`, then a summary line.
    pub fn to_csv(&self) -> String {
        let k = self.policy.k();
        let mut out = String::from("i,j,f,r\n");
        for i in 0..k {
            for j in 0..k {
                let f = self.f[i * k + j];
                if f != 0.0 {
                    out.push_str(&format!("{},{},{f},{}\n", i + 1, j + 1, self.policy.get(i, j)));
                }
            }
        }
        out.push_str("i,p_nf,d\n");
        for (i, p) in self.p_nf.as_slice().iter().enumerate() {
            let d = self.d.as_ref().map_or(String::new(), |d| d[i].to_string());
            out.push_str(&format!("{},{p},{d}\n", i + 1));
        }
        out.push_str(&format!(
            "# cost={},realized_entropy={},claimed_entropy={},entropy_gap={}\n",
            self.cost,
            self.realized_entropy,
            self.claimed_entropy.map_or(String::new(), |v| v.to_string()),
            self.entropy_gap.map_or(String::new(), |v| v.to_string()),
        ));
        out
    }
}

/// Turn a policy row into valid recommendation probabilities: entries in
/// `[0,1]` summing to `n`, with the diagonal left at 0.
fn repair_row(row: &mut [f64], i: usize, n: f64) {
    for v in row.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    row[i] = 0.0;
    let deficit = n - row.iter().sum::<f64>();
    if deficit > 0.0 {
        let room: f64 = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| 1.0 - v).sum();
        if room > 0.0 {
            for (j, v) in row.iter_mut().enumerate() {
                if j != i {
                    *v += deficit * (1.0 - *v) / room;
                }
            }
        }
    } else if deficit < 0.0 {
        let mass: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v += deficit * *v / mass;
        }
    }
    for v in row.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Map an optimal solve back to a policy: `r_ij = f_ij / p_i`.
pub fn recover(
    lp: &LinearProgram,
    report: &SolveReport,
    profile: &BaselineProfile,
    cuts: Option<&CutFamily>,
) -> Result<DiverseSolution> {
    if !report.is_optimal() {
        return Err(Error::NotOptimal {
            status: report.status.to_string(),
        });
    }
    let block = |name: &str| {
        lp.block(name)
            .ok_or_else(|| Error::InvalidProgram(format!("program has no {name:?} block")))
    };
    let k = profile.k();
    let n = profile.n() as f64;
    let f: Vec<f64> = report.block_values(block("f")?).iter().map(|v| v.max(0.0)).collect();
    let p_raw: Vec<f64> = report.block_values(block("p")?).iter().map(|v| v.max(0.0)).collect();
    if f.len() != k * k || p_raw.len() != k {
        return Err(Error::Shape("program does not match the profile".into()));
    }
    let p_nf = DemandDistribution::normalized(p_raw.clone())?;

    let mut rows = vec![0.0; k * k];
    let mut fallback_rows = Vec::new();
    for i in 0..k {
        let row = &mut rows[i * k..(i + 1) * k];
        if p_raw[i] < MIN_ROW_DEMAND {
            row.copy_from_slice(profile.policy.row(i));
            fallback_rows.push(i);
            continue;
        }
        for j in 0..k {
            row[j] = f[i * k + j] / p_raw[i];
        }
        repair_row(row, i, n);
    }
    let policy = RecommendationPolicy::new(k, profile.n(), rows)?;

    let realized_entropy = entropy_of_demand(&p_nf);
    let d = match cuts {
        Some(c) if lp.block("d").is_some() => {
            Some(p_raw.iter().map(|&x| c.envelope(x)).collect::<Vec<f64>>())
        }
        _ => None,
    };
    let claimed_entropy = d.as_ref().map(|d| -d.iter().sum::<f64>());
    Ok(DiverseSolution {
        cost: expected_cost(&p_nf, &profile.costs)?,
        f,
        p_nf,
        d,
        policy,
        realized_entropy,
        claimed_entropy,
        entropy_gap: claimed_entropy.map(|c| c - realized_entropy),
        cut_mode: cuts.filter(|_| claimed_entropy.is_some()).map(|c| c.mode),
        fallback_rows,
        objective: report.objective_value,
        iterations: report.iterations,
    })
}

/// Solve with default options and recover the policy.
pub fn solve_and_recover(
    lp: &LinearProgram,
    profile: &BaselineProfile,
    cuts: Option<&CutFamily>,
) -> Result<DiverseSolution> {
    let report = solve(lp, &SolveOptions::default());
    recover(lp, &report, profile, cuts)
}

/// Leading principal minors of the Hessian of `f ln(f/z)` in `(f, z)`.
/// The determinant is identically zero, so the function is jointly convex.
pub fn relative_entropy_hessian(f: f64, z: f64) -> Result<(f64, f64, f64)> {
    if !(f > 0.0 && z > 0.0) || !f.is_finite() || !z.is_finite() {
        return Err(Error::Domain(format!("need f, z > 0, got ({f}, {z})")));
    }
    let m11 = 1.0 / f;
    let m22 = f / (z * z);
    let det = m11 * m22 - 1.0 / (z * z);
    Ok((m11, m22, det))
}

/// Tolerances used by [`validate_solution`].
pub const DEMAND_MATCH_TOL: f64 = 1e-6;
pub const QUALITY_TOL: f64 = 1e-6;
pub const COST_MATCH_TOL: f64 = 1e-8;
pub const ENTROPY_TOL: f64 = 1e-7;
pub const FAIRNESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Total variation between `p_nf` and the demand recomputed from the policy.
    pub demand_mismatch: f64,
    /// `Σ_j r_ij u_ij` per row.
    pub quality: Vec<f64>,
    /// `min_i (quality_i - q·q_max_i)`.
    pub min_quality_slack: f64,
    pub cost: f64,
    /// Cost recomputed through the session model.
    pub session_cost: f64,
    pub realized_entropy: f64,
    pub entropy_floor: f64,
    pub fairness: FairnessMetrics,
    /// One entry per violated check, naming the constraint.
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn policy_quality(policy: &RecommendationPolicy, profile: &BaselineProfile) -> Vec<f64> {
    (0..policy.k())
        .map(|i| {
            policy
                .row(i)
                .iter()
                .zip(profile.relevance.row(i))
                .map(|(r, u)| r * u)
                .sum()
        })
        .collect()
}

/// Recompute everything from the recovered policy alone and compare with
/// the solution. The entropy floor is only checked for conservative cuts;
/// tangent cuts relax it and the gap is reported instead. KL fairness is
/// likewise relaxed by its tangent cuts and only reported.
pub fn validate_solution(
    sol: &DiverseSolution,
    profile: &BaselineProfile,
    cfg: &ScenarioConfig,
    fair: Option<&FairnessSpec>,
) -> Result<ValidationReport> {
    let alpha = profile.alpha;
    let demand = stationary_demand(&profile.p0, &sol.policy, alpha)?;
    let demand_mismatch = demand.total_variation(&sol.p_nf);
    let quality = policy_quality(&sol.policy, profile);
    let min_quality_slack = quality
        .iter()
        .zip(&profile.q_max)
        .map(|(a, m)| a - cfg.q * m)
        .fold(f64::INFINITY, f64::min);
    let session = session_cost(&profile.p0, &sol.policy, alpha, &profile.costs)?;
    let entropy_floor = cfg.b * profile.entropy_bs;
    let fairness = fairness_metrics(&sol.p_nf, &profile.demand_bs);

    let mut violations = Vec::new();
    if demand_mismatch > DEMAND_MATCH_TOL {
        violations.push(format!("demand balance: recomputed demand differs by {demand_mismatch:e}"));
    }
    for (i, (a, m)) in quality.iter().zip(&profile.q_max).enumerate() {
        if *a < cfg.q * m - QUALITY_TOL {
            violations.push(format!("quality row {}: {a} < {}", i + 1, cfg.q * m));
        }
    }
    if (session - sol.cost).abs() > COST_MATCH_TOL {
        violations.push(format!("cost: session model gives {session}, demand gives {}", sol.cost));
    }
    if sol.cut_mode.is_some_and(|m| m.is_conservative())
        && sol.realized_entropy < entropy_floor - ENTROPY_TOL
    {
        violations.push(format!(
            "entropy floor: {} < {entropy_floor}",
            sol.realized_entropy
        ));
    }
    if let Some(fs) = fair {
        let v = fs.bounded_value(&fairness);
        if fs.kind != FairnessKind::Kl && v > fs.c_f + FAIRNESS_TOL {
            violations.push(format!("fairness {}: {v} > {}", fs.kind, fs.c_f));
        }
    }
    Ok(ValidationReport {
        demand_mismatch,
        quality,
        min_quality_slack,
        cost: sol.cost,
        session_cost: session,
        realized_entropy: sol.realized_entropy,
        entropy_floor,
        fairness,
        violations,
    })
}
