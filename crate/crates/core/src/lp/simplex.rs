//! Bounded two-phase primal simplex with a product-form basis inverse.
//!
//! Every row `a x (rel) rhs` becomes `a x + s = rhs` with a logical `s`
//! whose bounds encode the relation. Rows whose starting residual cannot
//! be absorbed by the logical get an artificial column; phase one drives
//! the artificials to zero, phase two optimizes the real objective.
//!
//! The basis inverse is kept as a file of eta columns on top of the
//! all-logical identity basis and is rebuilt from scratch every
//! `refactor_every` pivots. Dantzig pricing with a Harris ratio test is
//! the default; after `stall_limit` consecutive degenerate pivots the
//! solver switches to Bland's rule until the objective moves again.

use super::{
    LinearProgram, Relation, SolveReport, SolveStatus, FEASIBILITY_TOL, OPTIMALITY_TOL, PIVOT_TOL,
};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Reduced-cost optimality tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub refactor_every: usize,
    pub stall_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: OPTIMALITY_TOL,
            max_iter: 500_000,
            refactor_every: 80,
            stall_limit: 200,
        }
    }
}

/// Solve `lp` to optimality (or report why not).
pub fn solve(lp: &LinearProgram, opts: &SolveOptions) -> SolveReport {
    let mut s = Simplex::new(lp, opts);
    let status = s.run();
    let primal_values: Vec<f64> = s.x[..s.n].to_vec();
    SolveReport {
        status,
        objective_value: lp.objective_value(&primal_values),
        max_constraint_violation: lp.max_violation(&primal_values),
        primal_values,
        iterations: s.iterations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable sitting at zero.
    Zero,
}

struct Eta {
    row: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

struct Simplex<'a> {
    opts: &'a SolveOptions,
    m: usize,
    n: usize,
    // structural columns, compressed by column
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    // artificial k lives at column n + m + k
    art_row: Vec<usize>,
    art_sign: Vec<f64>,
    rhs: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    cost: Vec<f64>,
    true_cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    head: Vec<usize>,
    etas: Vec<Eta>,
    pivots_since_refactor: usize,
    iterations: usize,
    // scratch
    work: Vec<f64>,
    dual: Vec<f64>,
}

impl<'a> Simplex<'a> {
    fn new(lp: &LinearProgram, opts: &'a SolveOptions) -> Self {
        let m = lp.num_constraints();
        let n = lp.num_vars();

        let mut counts = vec![0usize; n + 1];
        for c in lp.constraints() {
            for &(j, _) in &c.coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let nnz = col_start[n];
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        let mut fill = counts;
        for (i, c) in lp.constraints().iter().enumerate() {
            for &(j, a) in &c.coeffs {
                col_row[fill[j]] = i;
                col_val[fill[j]] = a;
                fill[j] += 1;
            }
        }

        let mut lo = Vec::with_capacity(n + 2 * m);
        let mut up = Vec::with_capacity(n + 2 * m);
        let mut x = Vec::with_capacity(n + 2 * m);
        let mut state = Vec::with_capacity(n + 2 * m);
        for b in lp.bounds() {
            lo.push(b.lower);
            up.push(b.upper);
            let (v, st) = if b.lower.is_finite() {
                (b.lower, State::AtLower)
            } else if b.upper.is_finite() {
                (b.upper, State::AtUpper)
            } else {
                (0.0, State::Zero)
            };
            x.push(v);
            state.push(st);
        }

        let rhs: Vec<f64> = lp.constraints().iter().map(|c| c.rhs).collect();
        let mut residual = rhs.clone();
        for (i, c) in lp.constraints().iter().enumerate() {
            residual[i] -= c.activity(&x);
        }

        let mut head = vec![0; m];
        let mut art_row = Vec::new();
        let mut art_sign = Vec::new();
        let mut art_value = Vec::new();
        for (i, c) in lp.constraints().iter().enumerate() {
            let (l, u) = match c.relation {
                Relation::LessEq => (0.0, f64::INFINITY),
                Relation::GreaterEq => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo.push(l);
            up.push(u);
            let r = residual[i];
            if r >= l && r <= u {
                x.push(r);
                state.push(State::Basic);
                head[i] = n + i;
            } else {
                let s0 = r.clamp(l, u);
                x.push(s0);
                state.push(if s0 == l { State::AtLower } else { State::AtUpper });
                let gap = r - s0;
                head[i] = n + m + art_row.len();
                art_row.push(i);
                art_sign.push(gap.signum());
                art_value.push(gap.abs());
            }
        }
        for v in art_value {
            lo.push(0.0);
            up.push(f64::INFINITY);
            x.push(v);
            state.push(State::Basic);
        }

        let total = n + m + art_row.len();
        let mut true_cost = vec![0.0; total];
        true_cost[..n].copy_from_slice(lp.objective());

        Simplex {
            opts,
            m,
            n,
            col_start,
            col_row,
            col_val,
            art_row,
            art_sign,
            rhs,
            lo,
            up,
            cost: vec![0.0; total],
            true_cost,
            x,
            state,
            head,
            etas: Vec::new(),
            pivots_since_refactor: 0,
            iterations: 0,
            work: vec![0.0; m],
            dual: vec![0.0; m],
        }
    }

    fn num_cols(&self) -> usize {
        self.x.len()
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n + self.m
    }

    /// Visit the nonzeros of column `j`.
    fn for_each_in_col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                f(self.col_row[k], self.col_val[k]);
            }
        } else if j < self.n + self.m {
            f(j - self.n, 1.0);
        } else {
            let k = j - self.n - self.m;
            f(self.art_row[k], self.art_sign[k]);
        }
    }

    fn col_nnz(&self, j: usize) -> usize {
        if j < self.n {
            self.col_start[j + 1] - self.col_start[j]
        } else {
            1
        }
    }

    fn ftran_in_place(etas: &[Eta], v: &mut [f64]) {
        for eta in etas {
            let t = v[eta.row];
            if t != 0.0 {
                let t = t / eta.pivot;
                v[eta.row] = t;
                for &(i, w) in &eta.entries {
                    v[i] -= w * t;
                }
            }
        }
    }

    fn btran_in_place(etas: &[Eta], y: &mut [f64]) {
        for eta in etas.iter().rev() {
            let mut acc = y[eta.row];
            for &(i, w) in &eta.entries {
                acc -= y[i] * w;
            }
            y[eta.row] = acc / eta.pivot;
        }
    }

    /// `work = B^{-1} a_j`.
    fn ftran_col(&mut self, j: usize) {
        let mut work = std::mem::take(&mut self.work);
        work.iter_mut().for_each(|v| *v = 0.0);
        self.for_each_in_col(j, |i, a| work[i] = a);
        Self::ftran_in_place(&self.etas, &mut work);
        self.work = work;
    }

    fn push_eta(&mut self, row: usize) {
        let pivot = self.work[row];
        let entries: Vec<(usize, f64)> = self
            .work
            .iter()
            .enumerate()
            .filter(|&(i, &w)| i != row && w.abs() > 1e-14)
            .map(|(i, &w)| (i, w))
            .collect();
        if entries.is_empty() && pivot == 1.0 {
            return;
        }
        self.etas.push(Eta {
            row,
            pivot,
            entries,
        });
    }

    /// Rebuild the eta file for the current basis and recompute basic values.
    fn refactor(&mut self) {
        self.etas.clear();
        self.pivots_since_refactor = 0;
        let n = self.n;
        let m = self.m;

        let mut logical_in_basis = vec![false; m];
        let mut others: Vec<usize> = Vec::new();
        for &j in &self.head {
            if j >= n && j < n + m {
                logical_in_basis[j - n] = true;
            } else {
                others.push(j);
            }
        }
        others.sort_by_key(|&j| (self.col_nnz(j), j));

        let mut available: Vec<bool> = logical_in_basis.iter().map(|&b| !b).collect();
        let mut new_head: Vec<usize> = (0..m).map(|i| n + i).collect();
        for j in others {
            self.ftran_col(j);
            let mut best = None;
            let mut best_abs = PIVOT_TOL.max(1e-7);
            for (i, &w) in self.work.iter().enumerate() {
                if available[i] && w.abs() > best_abs {
                    best_abs = w.abs();
                    best = Some(i);
                }
            }
            match best {
                Some(r) => {
                    self.push_eta(r);
                    available[r] = false;
                    new_head[r] = j;
                }
                None => {
                    // dependent column: drop it to a bound, a logical takes its slot
                    self.state[j] = if self.lo[j].is_finite() {
                        self.x[j] = self.lo[j];
                        State::AtLower
                    } else if self.up[j].is_finite() {
                        self.x[j] = self.up[j];
                        State::AtUpper
                    } else {
                        self.x[j] = 0.0;
                        State::Zero
                    };
                }
            }
        }
        for (i, avail) in available.iter().enumerate() {
            if *avail {
                // logical i re-enters the basis
                self.state[n + i] = State::Basic;
            }
        }
        self.head = new_head;
        self.recompute_basics();
    }

    fn recompute_basics(&mut self) {
        let mut r = self.rhs.clone();
        for j in 0..self.num_cols() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                let v = self.x[j];
                self.for_each_in_col(j, |i, a| r[i] -= a * v);
            }
        }
        Self::ftran_in_place(&self.etas, &mut r);
        for (i, &j) in self.head.iter().enumerate() {
            self.x[j] = r[i];
        }
    }

    fn compute_duals(&mut self) {
        for (i, &j) in self.head.iter().enumerate() {
            self.dual[i] = self.cost[j];
        }
        Self::btran_in_place(&self.etas, &mut self.dual);
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        let mut d = self.cost[j];
        self.for_each_in_col(j, |i, a| d -= self.dual[i] * a);
        d
    }

    /// Pick an entering column and its direction (+1 increase, -1 decrease).
    fn price(&self, bland: bool, phase_two: bool) -> Option<(usize, f64)> {
        let tol = self.opts.tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.num_cols() {
            let st = self.state[j];
            if st == State::Basic || self.lo[j] == self.up[j] {
                continue;
            }
            if phase_two && self.is_artificial(j) {
                continue;
            }
            let d = self.reduced_cost(j);
            let dir = match st {
                State::AtLower if d < -tol => 1.0,
                State::AtUpper if d > tol => -1.0,
                State::Zero if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Harris two-pass ratio test on `work = B^{-1} a_q`.
    /// Returns the leaving position (None for a bound flip or unbounded ray) and step.
    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> (Option<usize>, f64) {
        let flip = self.up[q] - self.lo[q];
        let delta = FEASIBILITY_TOL * 0.01;

        let limit = |i: usize, relaxed: f64| -> Option<f64> {
            let w = self.work[i];
            if w.abs() <= PIVOT_TOL {
                return None;
            }
            let j = self.head[i];
            let rate = -dir * w;
            if rate < 0.0 && self.lo[j].is_finite() {
                Some((self.x[j] - self.lo[j] + relaxed) / -rate)
            } else if rate > 0.0 && self.up[j].is_finite() {
                Some((self.up[j] - self.x[j] + relaxed) / rate)
            } else {
                None
            }
        };

        if bland {
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if let Some(t) = limit(i, 0.0) {
                    let t = t.max(0.0);
                    match best {
                        None => best = Some((i, t)),
                        Some((bi, bt)) => {
                            if t < bt - 1e-12 || (t <= bt + 1e-12 && self.head[i] < self.head[bi])
                            {
                                best = Some((i, t));
                            }
                        }
                    }
                }
            }
            return match best {
                Some((_, t)) if flip <= t => (None, flip),
                Some((i, t)) => (Some(i), t),
                None => (None, flip),
            };
        }

        let mut theta_max = f64::INFINITY;
        for i in 0..self.m {
            if let Some(t) = limit(i, delta) {
                theta_max = theta_max.min(t);
            }
        }
        if flip <= theta_max {
            return (None, flip);
        }
        if theta_max == f64::INFINITY {
            return (None, f64::INFINITY);
        }
        let mut best: Option<usize> = None;
        let mut best_w = 0.0;
        for i in 0..self.m {
            if let Some(t) = limit(i, 0.0) {
                if t <= theta_max && self.work[i].abs() > best_w {
                    best_w = self.work[i].abs();
                    best = Some(i);
                }
            }
        }
        let i = best.expect("a row attains the Harris bound");
        (Some(i), limit(i, 0.0).unwrap().max(0.0))
    }

    fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, v)| c * v).sum()
    }

    /// Iterate with the current cost vector until optimal, unbounded or out of iterations.
    fn optimize(&mut self, phase_two: bool) -> SolveStatus {
        let mut stalled = 0usize;
        let mut bland = false;
        let mut last_obj = self.objective();
        loop {
            if self.iterations >= self.opts.max_iter {
                return SolveStatus::IterationLimit;
            }
            if self.pivots_since_refactor >= self.opts.refactor_every {
                self.refactor();
            }
            self.compute_duals();
            let Some((q, dir)) = self.price(bland, phase_two) else {
                if self.pivots_since_refactor > 0 {
                    // confirm optimality against a fresh factorization
                    self.refactor();
                    self.compute_duals();
                    if self.price(bland, phase_two).is_some() {
                        continue;
                    }
                }
                return SolveStatus::Optimal;
            };
            self.ftran_col(q);
            let (leave, theta) = self.ratio_test(q, dir, bland);
            if theta == f64::INFINITY {
                return SolveStatus::Unbounded;
            }
            self.iterations += 1;

            let step = dir * theta;
            if step != 0.0 {
                for (i, &j) in self.head.iter().enumerate() {
                    let w = self.work[i];
                    if w != 0.0 {
                        self.x[j] -= step * w;
                    }
                }
                self.x[q] += step;
            }

            match leave {
                None => {
                    // bound flip
                    if dir > 0.0 {
                        self.x[q] = self.up[q];
                        self.state[q] = State::AtUpper;
                    } else {
                        self.x[q] = self.lo[q];
                        self.state[q] = State::AtLower;
                    }
                }
                Some(r) => {
                    let j = self.head[r];
                    let rate = -dir * self.work[r];
                    if rate < 0.0 {
                        self.x[j] = self.lo[j];
                        self.state[j] = State::AtLower;
                    } else {
                        self.x[j] = self.up[j];
                        self.state[j] = State::AtUpper;
                    }
                    if self.is_artificial(j) {
                        // an artificial that left never comes back
                        self.up[j] = 0.0;
                        self.x[j] = 0.0;
                        self.state[j] = State::AtLower;
                    }
                    self.state[q] = State::Basic;
                    self.head[r] = q;
                    self.push_eta(r);
                    self.pivots_since_refactor += 1;
                }
            }

            let obj = self.objective();
            if obj < last_obj - 1e-12 * (1.0 + last_obj.abs()) {
                stalled = 0;
                bland = false;
            } else {
                stalled += 1;
                if stalled >= self.opts.stall_limit {
                    bland = true;
                }
            }
            last_obj = obj;
        }
    }

    fn run(&mut self) -> SolveStatus {
        let total = self.num_cols();
        // artificial columns carry a sign, so the start basis needs etas too
        self.refactor();
        if !self.art_row.is_empty() {
            for j in 0..total {
                self.cost[j] = if self.is_artificial(j) { 1.0 } else { 0.0 };
            }
            match self.optimize(false) {
                SolveStatus::Optimal => {}
                other => return other,
            }
            let infeasibility: f64 = (self.n + self.m..total).map(|j| self.x[j].max(0.0)).sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if infeasibility > FEASIBILITY_TOL * scale {
                return SolveStatus::Infeasible;
            }
            for j in self.n + self.m..total {
                self.up[j] = 0.0;
                if self.state[j] != State::Basic {
                    self.x[j] = 0.0;
                    self.state[j] = State::AtLower;
                }
            }
        }
        self.cost.copy_from_slice(&self.true_cost);
        self.optimize(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{Bounds, Relation};

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn single_lower_bound_row() {
        let mut lp = LinearProgram::new();
        let x = lp.add_block("x", 1, Bounds::FREE).unwrap();
        lp.set_objective(x.index(0), 1.0).unwrap();
        lp.add_constraint("lb", vec![(x.index(0), 1.0)], Relation::GreaterEq, 2.0)
            .unwrap();
        let rep = solve(&lp, &opts());
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert!((rep.objective_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_corner() {
        let mut lp = LinearProgram::new();
        let x = lp.add_block("x", 2, Bounds::NONNEG).unwrap();
        lp.set_objective(x.index(0), -1.0).unwrap();
        lp.set_objective(x.index(1), -1.0).unwrap();
        lp.add_constraint(
            "cap",
            vec![(x.index(0), 1.0), (x.index(1), 1.0)],
            Relation::LessEq,
            1.0,
        )
        .unwrap();
        let rep = solve(&lp, &opts());
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert!((rep.objective_value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LinearProgram::new();
        let x = lp.add_block("x", 1, Bounds::FREE).unwrap();
        lp.add_constraint("hi", vec![(x.index(0), 1.0)], Relation::LessEq, -1.0)
            .unwrap();
        lp.add_constraint("lo", vec![(x.index(0), 1.0)], Relation::GreaterEq, 0.0)
            .unwrap();
        assert_eq!(solve(&lp, &opts()).status, SolveStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded_ray() {
        let mut lp = LinearProgram::new();
        let x = lp.add_block("x", 2, Bounds::NONNEG).unwrap();
        lp.set_objective(x.index(0), -1.0).unwrap();
        lp.add_constraint(
            "r",
            vec![(x.index(0), 1.0), (x.index(1), -1.0)],
            Relation::LessEq,
            1.0,
        )
        .unwrap();
        assert_eq!(solve(&lp, &opts()).status, SolveStatus::Unbounded);
    }

    #[test]
    fn equality_rows_and_upper_bounds() {
        // min -x0 - 2 x1, x0 + x1 = 1.5, x in [0,1]
        let mut lp = LinearProgram::new();
        let x = lp.add_block("x", 2, Bounds::new(0.0, 1.0)).unwrap();
        lp.set_objective(x.index(0), -1.0).unwrap();
        lp.set_objective(x.index(1), -2.0).unwrap();
        lp.add_constraint(
            "sum",
            vec![(x.index(0), 1.0), (x.index(1), 1.0)],
            Relation::Eq,
            1.5,
        )
        .unwrap();
        let rep = solve(&lp, &opts());
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert!((rep.objective_value + 2.5).abs() < 1e-12);
        assert!((rep.primal_values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut lp = LinearProgram::new();
        let x = lp.add_block("x", 3, Bounds::NONNEG).unwrap();
        for j in 0..3 {
            lp.set_objective(x.index(j), -1.0).unwrap();
            lp.add_constraint(format!("c{j}"), vec![(x.index(j), 1.0)], Relation::LessEq, 1.0)
                .unwrap();
        }
        let rep = solve(
            &lp,
            &SolveOptions {
                max_iter: 1,
                ..SolveOptions::default()
            },
        );
        assert_eq!(rep.status, SolveStatus::IterationLimit);
        assert_eq!(rep.iterations, 1);
    }
}
