//! Brute-force vertex enumeration, used to cross-check the simplex on
//! small programs.
//!
//! Every vertex is the solution of a square system in which each variable
//! is either pinned to one of its bounds or left "basic", and exactly as
//! many rows as there are basic variables hold with equality. Infinite
//! bounds are replaced by a box at `±B`, and the boxed program is solved
//! for `B = ORACLE_BOX` and `2·ORACLE_BOX`. A bounded program has the same
//! optimum in both; an unbounded one improves as the box grows. This assumes
//! the data is small enough that some optimum lies well inside the box.

use super::LinearProgram;
use crate::error::{Error, Result};

pub const ORACLE_MAX_VARS: usize = 12;
const ORACLE_BOX: f64 = 1e6;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleOutcome {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, PartialEq)]
enum Pin {
    Basic,
    Lower,
    Upper,
}

pub fn vertex_oracle(lp: &LinearProgram) -> Result<OracleOutcome> {
    let n = lp.num_vars();
    if n > ORACLE_MAX_VARS {
        return Err(Error::TooLarge {
            vars: n,
            limit: ORACLE_MAX_VARS,
        });
    }
    let Some(near) = boxed_optimum(lp, ORACLE_BOX) else {
        return Ok(OracleOutcome::Infeasible);
    };
    let far = boxed_optimum(lp, 2.0 * ORACLE_BOX).unwrap_or(near);
    Ok(if near - far > 1e-6 * (1.0 + near.abs()) {
        OracleOutcome::Unbounded
    } else {
        OracleOutcome::Optimal(near)
    })
}

fn boxed_optimum(lp: &LinearProgram, bound: f64) -> Option<f64> {
    let n = lp.num_vars();
    let lower: Vec<f64> = lp
        .bounds()
        .iter()
        .map(|b| if b.lower.is_finite() { b.lower } else { -bound })
        .collect();
    let upper: Vec<f64> = lp
        .bounds()
        .iter()
        .map(|b| if b.upper.is_finite() { b.upper } else { bound })
        .collect();
    let rows = lp.constraints();
    let dense: Vec<Vec<f64>> = rows
        .iter()
        .map(|c| {
            let mut r = vec![0.0; n];
            for &(j, a) in &c.coeffs {
                r[j] = a;
            }
            r
        })
        .collect();

    let mut best: Option<f64> = None;
    let mut pins = vec![Pin::Lower; n];
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for pin in pins.iter_mut() {
            *pin = match c % 3 {
                0 => Pin::Basic,
                1 => Pin::Lower,
                _ => Pin::Upper,
            };
            c /= 3;
        }
        if pins
            .iter()
            .zip(lower.iter().zip(&upper))
            .any(|(&p, (l, u))| p == Pin::Upper && l == u)
        {
            continue;
        }
        let basic: Vec<usize> = (0..n).filter(|&j| pins[j] == Pin::Basic).collect();
        let k = basic.len();
        if k > rows.len() {
            continue;
        }
        let mut x = vec![0.0; n];
        for j in 0..n {
            x[j] = match pins[j] {
                Pin::Lower => lower[j],
                Pin::Upper => upper[j],
                Pin::Basic => 0.0,
            };
        }
        for_each_subset(rows.len(), k, &mut |subset| {
            let mut a = vec![vec![0.0; k]; k];
            let mut b = vec![0.0; k];
            for (r, &row) in subset.iter().enumerate() {
                b[r] = rows[row].rhs;
                for j in 0..n {
                    if pins[j] != Pin::Basic {
                        b[r] -= dense[row][j] * x[j];
                    }
                }
                for (c, &j) in basic.iter().enumerate() {
                    a[r][c] = dense[row][j];
                }
            }
            let Some(sol) = gauss_solve(a, b) else {
                return;
            };
            let mut point = x.clone();
            for (c, &j) in basic.iter().enumerate() {
                point[j] = sol[c];
            }
            if !feasible(lp, &point, &lower, &upper) {
                return;
            }
            let obj = lp.objective_value(&point);
            if best.is_none_or(|v| obj < v) {
                best = Some(obj);
            }
        });
    }

    best
}

fn feasible(lp: &LinearProgram, x: &[f64], lower: &[f64], upper: &[f64]) -> bool {
    let bounds_ok = x
        .iter()
        .zip(lower.iter().zip(upper))
        .all(|(&v, (&l, &u))| v >= l - FEAS_TOL * (1.0 + l.abs()) && v <= u + FEAS_TOL * (1.0 + u.abs()));
    bounds_ok
        && lp
            .constraints()
            .iter()
            .all(|c| c.violation(x) <= FEAS_TOL * (1.0 + c.rhs.abs()))
}

fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let need = k - cur.len();
        for i in start..=n - need {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(k);
    rec(0, n, k, &mut cur, f);
}

/// Gaussian elimination with partial pivoting; `None` when (near) singular.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..k {
            let factor = a[r][col] / a[col][col];
            if factor != 0.0 {
                for c in col..k {
                    a[r][c] -= factor * a[col][c];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let mut s = b[r];
        for c in r + 1..k {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{Bounds, Relation};

    #[test]
    fn corner_of_simplex() {
        let mut lp = LinearProgram::new();
        let x = lp.add_block("x", 2, Bounds::NONNEG).unwrap();
        lp.set_objective(x.index(0), -1.0).unwrap();
        lp.set_objective(x.index(1), -1.0).unwrap();
        lp.add_constraint("c", vec![(0, 1.0), (1, 1.0)], Relation::LessEq, 1.0)
            .unwrap();
        assert_eq!(vertex_oracle(&lp).unwrap(), OracleOutcome::Optimal(-1.0));
    }

    #[test]
    fn unit_square_cut_by_half_plane() {
        let mut lp = LinearProgram::new();
        lp.add_block("x", 2, Bounds::new(0.0, 1.0)).unwrap();
        lp.set_objective(0, 1.0).unwrap();
        lp.set_objective(1, 1.0).unwrap();
        lp.add_constraint("c", vec![(0, 1.0), (1, 1.0)], Relation::GreaterEq, 1.0)
            .unwrap();
        assert_eq!(vertex_oracle(&lp).unwrap(), OracleOutcome::Optimal(1.0));
    }

    #[test]
    fn empty_feasible_set() {
        let mut lp = LinearProgram::new();
        lp.add_block("x", 1, Bounds::FREE).unwrap();
        lp.add_constraint("a", vec![(0, 1.0)], Relation::LessEq, -1.0).unwrap();
        lp.add_constraint("b", vec![(0, 1.0)], Relation::GreaterEq, 0.0).unwrap();
        assert_eq!(vertex_oracle(&lp).unwrap(), OracleOutcome::Infeasible);
    }

    #[test]
    fn open_ray_is_unbounded() {
        let mut lp = LinearProgram::new();
        lp.add_block("x", 1, Bounds::NONNEG).unwrap();
        lp.set_objective(0, -1.0).unwrap();
        assert_eq!(vertex_oracle(&lp).unwrap(), OracleOutcome::Unbounded);
    }

    #[test]
    fn free_variable_with_flat_objective_is_bounded() {
        let mut lp = LinearProgram::new();
        lp.add_block("x", 2, Bounds::FREE).unwrap();
        lp.set_objective(1, 1.0).unwrap();
        lp.add_constraint("c", vec![(1, 1.0)], Relation::GreaterEq, 2.0).unwrap();
        assert_eq!(vertex_oracle(&lp).unwrap(), OracleOutcome::Optimal(2.0));
    }

    #[test]
    fn refuses_large_programs() {
        let mut lp = LinearProgram::new();
        lp.add_block("x", ORACLE_MAX_VARS + 1, Bounds::NONNEG).unwrap();
        assert!(matches!(vertex_oracle(&lp), Err(Error::TooLarge { .. })));
    }
}
