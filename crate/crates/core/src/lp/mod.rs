//! Sparse linear programs, a two-phase primal simplex, MPS export and a
//! brute-force vertex oracle.
//!
//! Programs are always minimizations. Constraints are stored in relation
//! form (`<=`, `=`, `>=`) exactly as they were added; the solver converts
//! them internally.

mod mps;
mod oracle;
mod simplex;

use std::collections::HashSet;
use std::fmt;

pub use mps::{read_mps, write_mps, write_mps_string, MpsFormat};
pub use oracle::{vertex_oracle, OracleOutcome, ORACLE_MAX_VARS};
pub use simplex::{solve, SolveOptions};

use crate::error::{Error, Result};

/// Primal feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// Smallest pivot magnitude accepted by the ratio test.
pub const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    LessEq,
    Eq,
    GreaterEq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::LessEq => "<=",
            Relation::Eq => "=",
            Relation::GreaterEq => ">=",
        })
    }
}

/// A contiguous, named range of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct VarBlock {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl VarBlock {
    pub fn index(&self, offset: usize) -> usize {
        debug_assert!(offset < self.len);
        self.start + offset
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const NONNEG: Bounds = Bounds {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    pub const FREE: Bounds = Bounds {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Bounds { lower, upper }
    }

    pub fn fixed(value: f64) -> Self {
        Bounds {
            lower: value,
            upper: value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::LessEq => (lhs - self.rhs).max(0.0),
            Relation::GreaterEq => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimization LP with named variable blocks and sparse rows.
///
/// Every mutation validates its input, so a `LinearProgram` that exists
/// always satisfies: coefficients reference declared variables, right-hand
/// sides are finite, and no row mentions a variable twice.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    blocks: Vec<VarBlock>,
    bounds: Vec<Bounds>,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declare `len` variables sharing `bounds`, returning the new block.
    pub fn add_block(&mut self, name: &str, len: usize, bounds: Bounds) -> Result<VarBlock> {
        if name.is_empty() || self.blocks.iter().any(|b| b.name == name) {
            return Err(Error::InvalidProgram(format!(
                "block name {name:?} is empty or already declared"
            )));
        }
        check_bounds(name, bounds)?;
        let block = VarBlock {
            name: name.to_string(),
            start: self.bounds.len(),
            len,
        };
        self.bounds.extend(std::iter::repeat_n(bounds, len));
        self.objective.extend(std::iter::repeat_n(0.0, len));
        self.blocks.push(block.clone());
        Ok(block)
    }

    pub fn set_bounds(&mut self, var: usize, bounds: Bounds) -> Result<()> {
        self.check_var(var)?;
        check_bounds(&self.var_name(var), bounds)?;
        self.bounds[var] = bounds;
        Ok(())
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) -> Result<()> {
        self.check_var(var)?;
        if !coeff.is_finite() {
            return Err(Error::InvalidProgram(format!(
                "non-finite objective coefficient on {}",
                self.var_name(var)
            )));
        }
        self.objective[var] = coeff;
        Ok(())
    }

    /// Append a row. Zero coefficients are dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> Result<usize> {
        let name = name.into();
        if !rhs.is_finite() {
            return Err(Error::InvalidProgram(format!("row {name}: non-finite rhs")));
        }
        let mut seen = HashSet::with_capacity(coeffs.len());
        for &(j, a) in &coeffs {
            self.check_var(j)?;
            if !a.is_finite() {
                return Err(Error::InvalidProgram(format!(
                    "row {name}: non-finite coefficient"
                )));
            }
            if !seen.insert(j) {
                return Err(Error::InvalidProgram(format!(
                    "row {name}: variable {} appears twice",
                    self.var_name(j)
                )));
            }
        }
        let coeffs = coeffs.into_iter().filter(|&(_, a)| a != 0.0).collect();
        self.constraints.push(Constraint {
            name,
            coeffs,
            relation,
            rhs,
        });
        Ok(self.constraints.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.coeffs.len()).sum()
    }

    pub fn blocks(&self) -> &[VarBlock] {
        &self.blocks
    }

    pub fn block(&self, name: &str) -> Option<&VarBlock> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max);
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(b, &v)| (b.lower - v).max(v - b.upper).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// `block[offset]`, e.g. `f[12]`.
    pub fn var_name(&self, var: usize) -> String {
        match self.blocks.iter().find(|b| b.range().contains(&var)) {
            Some(b) => format!("{}[{}]", b.name, var - b.start),
            None => format!("x[{var}]"),
        }
    }

    fn check_var(&self, var: usize) -> Result<()> {
        if var < self.bounds.len() {
            Ok(())
        } else {
            Err(Error::InvalidProgram(format!(
                "variable index {var} not declared ({} variables)",
                self.bounds.len()
            )))
        }
    }
}

fn check_bounds(name: &str, b: Bounds) -> Result<()> {
    if b.lower.is_nan() || b.upper.is_nan() || b.lower > b.upper || b.lower == f64::INFINITY {
        return Err(Error::InvalidProgram(format!(
            "{name}: invalid bounds [{}, {}]",
            b.lower, b.upper
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration_limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective_value: f64,
    /// One value per declared variable, in declaration order.
    pub primal_values: Vec<f64>,
    pub iterations: usize,
    pub max_constraint_violation: f64,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn block_values<'a>(&'a self, block: &VarBlock) -> &'a [f64] {
        &self.primal_values[block.range()]
    }
}
