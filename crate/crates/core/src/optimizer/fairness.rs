use std::fmt;
use std::str::FromStr;

use super::cuts::UnknownName;
use crate::demand::DemandDistribution;
use crate::error::{Error, Result};

/// Distance used to keep the optimized demand close to the baseline's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FairnessKind {
    /// Largest per-item difference.
    Max,
    /// Total variation.
    Tv,
    /// `KL(p_bs || p)`.
    Kl,
}

impl fmt::Display for FairnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FairnessKind::Max => "max",
            FairnessKind::Tv => "tv",
            FairnessKind::Kl => "kl",
        })
    }
}

impl FromStr for FairnessKind {
    type Err = UnknownName;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "max" => Ok(FairnessKind::Max),
            "tv" => Ok(FairnessKind::Tv),
            "kl" => Ok(FairnessKind::Kl),
            _ => Err(UnknownName {
                what: "fairness kind",
                name: s.to_string(),
            }),
        }
    }
}

/// A fairness bound. For `Tv` the program bounds `Σ|p_i - p_bs_i|`, which
/// is twice the total-variation distance; `step` and `m_kl` only matter
/// for `Kl`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairnessSpec {
    pub kind: FairnessKind,
    pub c_f: f64,
    pub step: f64,
    pub m_kl: usize,
}

impl FairnessSpec {
    pub fn new(kind: FairnessKind, c_f: f64) -> Result<Self> {
        Self::with_cuts(kind, c_f, 0.1, 100)
    }

    pub fn with_cuts(kind: FairnessKind, c_f: f64, step: f64, m_kl: usize) -> Result<Self> {
        if !(c_f >= 0.0) || !c_f.is_finite() {
            return Err(Error::Config(format!("fairness bound {c_f} must be >= 0")));
        }
        if kind == FairnessKind::Kl && (!(step > 0.0) || m_kl == 0) {
            return Err(Error::Config("kl fairness needs a positive step and cut count".into()));
        }
        Ok(FairnessSpec {
            kind,
            c_f,
            step,
            m_kl,
        })
    }

    /// Metric value that the program's block bounds by `c_f`.
    pub fn bounded_value(&self, m: &FairnessMetrics) -> f64 {
        match self.kind {
            FairnessKind::Max => m.max,
            FairnessKind::Tv => 2.0 * m.tv,
            FairnessKind::Kl => m.kl,
        }
    }
}

/// Distances between an optimized demand and the baseline demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairnessMetrics {
    pub max: f64,
    /// `½ Σ |p_i - p_bs_i|`.
    pub tv: f64,
    /// `Σ p_bs_i ln(p_bs_i / p_i)`; infinite when `p` misses baseline mass.
    pub kl: f64,
}

pub fn fairness_metrics(p: &DemandDistribution, p_bs: &DemandDistribution) -> FairnessMetrics {
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    let mut kl = 0.0;
    for (&a, &b) in p.as_slice().iter().zip(p_bs.as_slice()) {
        let d = (a - b).abs();
        max = max.max(d);
        sum += d;
        if b > 0.0 {
            kl += if a > 0.0 { b * (b / a).ln() } else { f64::INFINITY };
        }
    }
    FairnessMetrics {
        max,
        tv: 0.5 * sum,
        kl,
    }
}
