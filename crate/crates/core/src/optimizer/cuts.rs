use std::fmt;
use std::str::FromStr;

use crate::demand::xlnx;
use crate::error::{Error, Result};

/// Step between exponential sample exponents when none is given.
pub const DEFAULT_EXP_STEP: f64 = 0.1;

/// How the entropy term `x ln x` is linearized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutMode {
    /// Tangents at `m/M`, `m = 1..M`.
    TangentLinear,
    /// Tangents at `e^{-(m-1)s}`, `m = 1..M`.
    TangentExponential { step: f64 },
    /// Chords between consecutive points of `0, 1/M, ..., 1`. Their
    /// maximum is the piecewise-linear interpolant, which lies above `x ln x`.
    Secant,
}

impl CutMode {
    pub fn is_conservative(&self) -> bool {
        matches!(self, CutMode::Secant)
    }
}

impl fmt::Display for CutMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutMode::TangentLinear => f.write_str("tangent"),
            CutMode::TangentExponential { step } if *step == DEFAULT_EXP_STEP => {
                f.write_str("tangent_exponential")
            }
            CutMode::TangentExponential { step } => write!(f, "tangent_exponential:{step}"),
            CutMode::Secant => f.write_str("secant"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownName {
    pub(crate) what: &'static str,
    pub(crate) name: String,
}

impl fmt::Display for UnknownName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown {} {:?}", self.what, self.name)
    }
}

impl std::error::Error for UnknownName {}

impl FromStr for CutMode {
    type Err = UnknownName;

    /// Accepts `tangent` (alias `tangent_linear`), `secant`, and
    /// `tangent_exponential[:step]`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let unknown = || UnknownName {
            what: "cut mode",
            name: s.to_string(),
        };
        match s {
            "tangent" | "tangent_linear" => Ok(CutMode::TangentLinear),
            "secant" => Ok(CutMode::Secant),
            "tangent_exponential" => Ok(CutMode::TangentExponential {
                step: DEFAULT_EXP_STEP,
            }),
            _ => {
                let step = s
                    .strip_prefix("tangent_exponential:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| *v > 0.0 && v.is_finite())
                    .ok_or_else(unknown)?;
                Ok(CutMode::TangentExponential { step })
            }
        }
    }
}

/// `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutLine {
    pub slope: f64,
    pub intercept: f64,
}

impl CutLine {
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutFamily {
    pub mode: CutMode,
    /// Point where each line touches `x ln x` (tangent modes), or the left
    /// end of each chord (secant mode).
    pub points: Vec<f64>,
    pub lines: Vec<CutLine>,
}

impl CutFamily {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// `max_m L_m(x)`.
    pub fn envelope(&self, x: f64) -> f64 {
        self.lines
            .iter()
            .map(|l| l.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn tangent(x: f64) -> CutLine {
    CutLine {
        slope: 1.0 + x.ln(),
        intercept: -x,
    }
}

pub fn make_cuts(mode: CutMode, m: usize) -> Result<CutFamily> {
    if m == 0 {
        return Err(Error::Config("at least one cut is required".into()));
    }
    let (points, lines) = match mode {
        CutMode::TangentLinear => {
            let points: Vec<f64> = (1..=m).map(|i| i as f64 / m as f64).collect();
            let lines = points.iter().map(|&x| tangent(x)).collect();
            (points, lines)
        }
        CutMode::TangentExponential { step } => {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::Config(format!("exponential step {step} must be positive")));
            }
            let points: Vec<f64> = (0..m).map(|i| (-(i as f64) * step).exp()).collect();
            // Slopes and intercepts in closed form so x = 1 stays exact.
            let lines = (0..m)
                .map(|i| CutLine {
                    slope: 1.0 - i as f64 * step,
                    intercept: -points[i],
                })
                .collect();
            (points, lines)
        }
        CutMode::Secant => {
            let grid: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
            let lines = grid
                .windows(2)
                .map(|w| {
                    let slope = (xlnx(w[1]) - xlnx(w[0])) / (w[1] - w[0]);
                    CutLine {
                        slope,
                        intercept: xlnx(w[0]) - slope * w[0],
                    }
                })
                .collect();
            (grid[..m].to_vec(), lines)
        }
    };
    Ok(CutFamily {
        mode,
        points,
        lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_linear_tangent_is_x_minus_one() {
        let c = make_cuts(CutMode::TangentLinear, 100).unwrap();
        let last = c.lines[99];
        assert_eq!(last.slope, 1.0);
        assert_eq!(last.intercept, -1.0);
        assert_eq!(last.eval(1.0), 0.0);
    }

    #[test]
    fn tangent_at_one_tenth() {
        let c = make_cuts(CutMode::TangentLinear, 10).unwrap();
        let l = c.lines[0];
        assert!((l.eval(0.1) - (-0.230_258_509_299_404_6)).abs() < 1e-12);
        assert!(l.eval(0.05) <= xlnx(0.05));
    }

    #[test]
    fn exponential_tangents_touch() {
        let c = make_cuts(CutMode::TangentExponential { step: 0.1 }, 50).unwrap();
        for (x, l) in c.points.iter().zip(&c.lines) {
            assert!((l.eval(*x) - xlnx(*x)).abs() < 1e-12);
        }
        assert_eq!(c.lines[0], CutLine { slope: 1.0, intercept: -1.0 });
    }

    #[test]
    fn secant_envelope_interpolates() {
        let c = make_cuts(CutMode::Secant, 4).unwrap();
        assert_eq!(c.len(), 4);
        for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
            assert!((c.envelope(x) - xlnx(x)).abs() < 1e-15);
        }
        assert!(c.envelope(0.1) > xlnx(0.1));
    }

    #[test]
    fn parse_modes() {
        assert_eq!("tangent".parse::<CutMode>().unwrap(), CutMode::TangentLinear);
        assert_eq!("secant".parse::<CutMode>().unwrap(), CutMode::Secant);
        let e: CutMode = "tangent_exponential:0.05".parse().unwrap();
        assert_eq!(e, CutMode::TangentExponential { step: 0.05 });
        assert_eq!(e.to_string().parse::<CutMode>().unwrap(), e);
        assert!("chord".parse::<CutMode>().is_err());
        assert!("tangent_exponential:-1".parse::<CutMode>().is_err());
        assert!(make_cuts(CutMode::Secant, 0).is_err());
    }
}
