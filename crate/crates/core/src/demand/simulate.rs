use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{DemandDistribution, RecommendationPolicy};
use crate::catalog::CostVector;
use crate::error::{Error, Result};

/// How a user picks among the recommendations after item `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChoiceMode {
    /// Draw `j` with probability `r_ij / N` directly.
    #[default]
    Marginal,
    /// Materialize an `N`-item list by systematic sampling, then pick one
    /// uniformly. Same marginals, slower.
    Listed,
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub alpha: f64,
    /// Items per session.
    pub length: usize,
    pub sessions: usize,
    pub seed: u64,
    pub mode: ChoiceMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub demand: DemandDistribution,
    pub counts: Vec<u64>,
    pub steps: u64,
    pub mean_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionTrace {
    pub items: Vec<usize>,
    /// `followed[t]` is true when item `t` came from a recommendation.
    pub followed: Vec<bool>,
}

/// Select `N = Σ row` distinct items so that item `j` is included with
/// probability `row[j]` (each entry must be at most 1). `u` is the single
/// uniform offset in `[0,1)`.
pub fn systematic_sample(row: &[f64], u: f64) -> Vec<usize> {
    let mut picked = Vec::new();
    let mut cum = 0.0;
    let mut next = u;
    for (j, &r) in row.iter().enumerate() {
        let hi = cum + r;
        if r > 0.0 && next < hi {
            picked.push(j);
            next += 1.0;
        }
        cum = hi;
    }
    picked
}

struct Walker<'a> {
    policy: &'a RecommendationPolicy,
    direct: WeightedIndex<f64>,
    rows: Vec<WeightedIndex<f64>>,
    cfg: &'a SimulationConfig,
}

impl<'a> Walker<'a> {
    fn new(
        p0: &DemandDistribution,
        policy: &'a RecommendationPolicy,
        cfg: &'a SimulationConfig,
    ) -> Result<Self> {
        if p0.len() != policy.k() {
            return Err(Error::Shape("p0 and policy sizes differ".into()));
        }
        if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
            return Err(Error::Config(format!("alpha = {} outside (0,1)", cfg.alpha)));
        }
        if cfg.sessions == 0 || cfg.length == 0 {
            return Err(Error::Config("sessions and session length must be positive".into()));
        }
        let direct = WeightedIndex::new(p0.as_slice())
            .map_err(|e| Error::Domain(format!("direct demand: {e}")))?;
        let rows = (0..policy.k())
            .map(|i| {
                WeightedIndex::new(policy.row(i))
                    .map_err(|e| Error::Domain(format!("policy row {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Walker {
            policy,
            direct,
            rows,
            cfg,
        })
    }

    /// Each session owns the ChaCha stream numbered by its index.
    fn walk(&self, session: u64, mut visit: impl FnMut(usize, bool)) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(session);
        let mut item = self.direct.sample(&mut rng);
        visit(item, false);
        for _ in 1..self.cfg.length {
            if rng.gen::<f64>() < self.cfg.alpha {
                item = match self.cfg.mode {
                    ChoiceMode::Marginal => self.rows[item].sample(&mut rng),
                    ChoiceMode::Listed => {
                        let list = systematic_sample(self.policy.row(item), rng.gen::<f64>());
                        list[rng.gen_range(0..list.len())]
                    }
                };
                visit(item, true);
            } else {
                item = self.direct.sample(&mut rng);
                visit(item, false);
            }
        }
    }
}

/// Simulate `sessions` sessions of fixed length and return the empirical
/// item frequencies and mean per-request cost. The result depends only on
/// the inputs and the seed, not on thread scheduling.
pub fn simulate_sessions(
    p0: &DemandDistribution,
    policy: &RecommendationPolicy,
    costs: &CostVector,
    cfg: &SimulationConfig,
) -> Result<SimulationResult> {
    let walker = Walker::new(p0, policy, cfg)?;
    let k = policy.k();
    if costs.len() != k {
        return Err(Error::Shape("cost vector and policy sizes differ".into()));
    }
    let counts = (0..cfg.sessions as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; k],
            |mut acc, s| {
                walker.walk(s, |item, _| acc[item] += 1);
                acc
            },
        )
        .reduce(
            || vec![0u64; k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let steps: u64 = counts.iter().sum();
    let demand =
        DemandDistribution::normalized(counts.iter().map(|&c| c as f64).collect())?;
    let mean_cost = counts
        .iter()
        .zip(costs.as_slice())
        .map(|(&n, c)| n as f64 * c)
        .sum::<f64>()
        / steps as f64;
    Ok(SimulationResult {
        demand,
        counts,
        steps,
        mean_cost,
    })
}

/// Record full traces (intended for small runs).
pub fn simulate_traces(
    p0: &DemandDistribution,
    policy: &RecommendationPolicy,
    cfg: &SimulationConfig,
) -> Result<Vec<SessionTrace>> {
    let walker = Walker::new(p0, policy, cfg)?;
    Ok((0..cfg.sessions as u64)
        .map(|s| {
            let mut t = SessionTrace {
                items: Vec::with_capacity(cfg.length),
                followed: Vec::with_capacity(cfg.length),
            };
            walker.walk(s, |item, followed| {
                t.items.push(item);
                t.followed.push(followed);
            });
            t
        })
        .collect())
}

/// `session,step,item,followed,cost` with 1-based item ids.
pub fn trace_csv(traces: &[SessionTrace], costs: &CostVector) -> String {
    let mut out = String::from("session,step,item,followed,cost\n");
    for (s, t) in traces.iter().enumerate() {
        for (step, (&item, &followed)) in t.items.iter().zip(&t.followed).enumerate() {
            out.push_str(&format!(
                "{s},{step},{},{},{}\n",
                item + 1,
                u8::from(followed),
                costs.as_slice()[item]
            ));
        }
    }
    out
}
