//! Bounded-variable primal revised simplex.
//!
//! Each row `i` gets a logical variable `r_i` with `A x - r = 0` and
//! `row_lower_i <= r_i <= row_upper_i`, so rows and columns are handled by
//! the same bounded-variable machinery. Variables `0..n` are structural,
//! `n..n+m` are the logicals.
//!
//! Phase 1 is the composite method: while some basic variable is out of
//! bounds the cost vector is the gradient of the sum of infeasibilities, and
//! the ratio test stops at the first breakpoint where an infeasible basic
//! variable reaches its violated bound. Phase 2 uses the true costs.
//!
//! The basis inverse is kept explicitly (row-major, `m x m`) and updated by
//! elementary row operations; it is rebuilt from scratch every
//! `refactor_every` pivots. Pricing is Dantzig's rule; after `bland_after`
//! consecutive degenerate pivots the solver switches to Bland's rule until
//! the next nondegenerate step.

use std::sync::Arc;

use log::trace;
use nalgebra::DMatrix;

use super::{Basis, LpProblem, LpSolution, Status, Tolerances, VarState};
use crate::error::{Error, Result};

/// Smallest magnitude accepted when eliminating a singleton basic column.
const SINGLETON_PIVOT: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct SimplexSolver {
    pub tol: Tolerances,
    pub pivot_tol: f64,
    pub refactor_every: usize,
    pub bland_after: usize,
    /// `None` picks a limit from the problem size.
    pub max_iterations: Option<usize>,
}

impl Default for SimplexSolver {
    fn default() -> Self {
        SimplexSolver::new(Tolerances::default())
    }
}

impl SimplexSolver {
    pub fn new(tol: Tolerances) -> Self {
        SimplexSolver {
            tol,
            pivot_tol: 1e-9,
            refactor_every: 64,
            bland_after: 50,
            max_iterations: None,
        }
    }

    pub fn solve(&self, problem: &LpProblem, warm: Option<&Basis>) -> Result<LpSolution> {
        problem.validate()?;
        let state = match warm.and_then(|b| State::from_basis(problem, self, b)) {
            Some(state) => state,
            None => State::cold(problem, self),
        };
        state.run()
    }
}

struct State<'a> {
    p: &'a LpProblem,
    opts: &'a SimplexSolver,
    m: usize,
    n: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    header: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    binv: Vec<f64>,
    updates: usize,
    iterations: usize,
}

enum Step {
    Flip,
    Pivot { row: usize, to_upper: bool },
}

impl<'a> State<'a> {
    fn bounds(p: &LpProblem) -> (Vec<f64>, Vec<f64>) {
        let mut lower = p.col_lower.clone();
        lower.extend_from_slice(&p.row_lower);
        let mut upper = p.col_upper.clone();
        upper.extend_from_slice(&p.row_upper);
        (lower, upper)
    }

    fn blank(p: &'a LpProblem, opts: &'a SimplexSolver) -> Self {
        let (m, n) = (p.num_rows(), p.num_cols());
        let (lower, upper) = Self::bounds(p);
        State {
            p,
            opts,
            m,
            n,
            lower,
            upper,
            header: Vec::new(),
            state: vec![VarState::Free; n + m],
            x: vec![0.0; n + m],
            binv: vec![0.0; m * m],
            updates: 0,
            iterations: 0,
        }
    }

    /// Places nonbasic `j` at a bound, or keeps it at `value` when free.
    fn place_nonbasic(&mut self, j: usize, preferred: VarState, value: f64) {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        let (st, v) = match preferred {
            VarState::AtLower if lo.is_finite() => (VarState::AtLower, lo),
            VarState::AtUpper if hi.is_finite() => (VarState::AtUpper, hi),
            _ => {
                if value.is_finite() && value >= lo && value <= hi {
                    (VarState::Free, value)
                } else if lo.is_finite() && (value < lo || !hi.is_finite()) {
                    (VarState::AtLower, lo)
                } else if hi.is_finite() {
                    (VarState::AtUpper, hi)
                } else {
                    (VarState::Free, 0.0)
                }
            }
        };
        self.state[j] = st;
        self.x[j] = v;
    }

    /// Slack basis, with singleton structural columns crashed in for rows
    /// the slack basis would leave infeasible.
    fn cold(p: &'a LpProblem, opts: &'a SimplexSolver) -> Self {
        let mut s = Self::blank(p, opts);
        let (m, n) = (s.m, s.n);
        for j in 0..n {
            s.place_nonbasic(j, VarState::AtLower, 0.0);
        }
        s.header = (n..n + m).collect();
        for i in 0..m {
            s.state[n + i] = VarState::Basic;
        }
        let activity = p.activities(&s.x[..n]);

        let mut singleton_row = vec![None; n];
        for (j, slot) in singleton_row.iter_mut().enumerate() {
            let mut nz = p.column(j).iter().enumerate().filter(|(_, v)| **v != 0.0);
            if let (Some((i, _)), None) = (nz.next(), nz.next()) {
                *slot = Some(i);
            }
        }
        let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (j, r) in singleton_row.iter().enumerate() {
            if let Some(i) = r {
                by_row[*i].push(j);
            }
        }

        let ftol = opts.tol.feasibility;
        let mut diag = vec![-1.0; m];
        for i in 0..m {
            let (lo, hi) = (p.row_lower[i], p.row_upper[i]);
            let act = activity[i];
            let (target, to_upper) = if act < lo - ftol {
                (lo, false)
            } else if act > hi + ftol {
                (hi, true)
            } else {
                continue;
            };
            for &j in &by_row[i] {
                if s.state[j] == VarState::Basic {
                    continue;
                }
                let a = p.coeff(i, j);
                let xj = s.x[j] + (target - act) / a;
                if xj >= s.lower[j] - ftol && xj <= s.upper[j] + ftol {
                    s.header[i] = j;
                    s.state[j] = VarState::Basic;
                    s.state[n + i] = if to_upper {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    s.x[n + i] = target;
                    diag[i] = a;
                    break;
                }
            }
        }
        for (i, d) in diag.iter().enumerate() {
            s.binv[i * m + i] = 1.0 / d;
        }
        s.compute_basic_values();
        s
    }

    fn from_basis(p: &'a LpProblem, opts: &'a SimplexSolver, basis: &Basis) -> Option<Self> {
        let mut s = Self::blank(p, opts);
        let (m, n) = (s.m, s.n);
        if basis.header.len() != m || basis.state.len() != n + m {
            return None;
        }
        let mut seen = vec![false; n + m];
        for &j in &basis.header {
            if j >= n + m || seen[j] || basis.state[j] != VarState::Basic {
                return None;
            }
            seen[j] = true;
        }
        s.header = basis.header.clone();
        for j in 0..n + m {
            if seen[j] {
                s.state[j] = VarState::Basic;
            } else {
                let st = basis.state[j];
                let v = basis.values.get(j).copied().unwrap_or(0.0);
                s.place_nonbasic(j, st, v);
            }
        }
        match &basis.inverse {
            Some(inv) if inv.len() == m * m && basis.updates < opts.refactor_every => {
                s.binv.copy_from_slice(inv);
                s.updates = basis.updates;
            }
            _ => {
                if !s.refactor() {
                    return None;
                }
            }
        }
        s.compute_basic_values();
        Some(s)
    }

    #[inline]
    fn column_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.p.column(j).iter().zip(y).map(|(a, b)| a * b).sum()
        } else {
            -y[j - self.n]
        }
    }

    /// Rebuilds the basis inverse. Returns false when the basis is singular.
    /// Entry `(i, j)` of the extended matrix `[A  -I]`.
    fn entry(&self, i: usize, j: usize) -> f64 {
        if j < self.n {
            self.p.column(j)[i]
        } else if j - self.n == i {
            -1.0
        } else {
            0.0
        }
    }

    /// The single nonzero of column `j`, if it has exactly one.
    fn singleton(&self, j: usize) -> Option<(usize, f64)> {
        if j >= self.n {
            return Some((j - self.n, -1.0));
        }
        let mut nz = self.p.column(j).iter().enumerate().filter(|(_, v)| **v != 0.0);
        match (nz.next(), nz.next()) {
            (Some((i, &v)), None) => Some((i, v)),
            _ => None,
        }
    }

    /// Rebuilds the inverse from scratch. Basic columns with a single
    /// nonzero are eliminated directly, so only the block of the remaining
    /// columns on the rows they leave uncovered goes through a dense
    /// inversion.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        self.updates = 0;
        if m == 0 {
            return true;
        }
        let mut owner = vec![usize::MAX; m];
        let mut owner_val = vec![0.0; m];
        let mut dense = Vec::new();
        for (k, &j) in self.header.iter().enumerate() {
            match self.singleton(j) {
                Some((i, v)) if owner[i] == usize::MAX && v.abs() >= SINGLETON_PIVOT => {
                    owner[i] = k;
                    owner_val[i] = v;
                }
                _ => dense.push(k),
            }
        }
        let free_rows: Vec<usize> = (0..m).filter(|&i| owner[i] == usize::MAX).collect();
        let kk = dense.len();
        debug_assert_eq!(kk, free_rows.len());

        let mut block = DMatrix::<f64>::zeros(kk, kk);
        for (c, &k) in dense.iter().enumerate() {
            let j = self.header[k];
            for (r, &i) in free_rows.iter().enumerate() {
                block[(r, c)] = self.entry(i, j);
            }
        }
        let Some(inv) = (if kk == 0 { Some(block) } else { block.try_inverse() }) else {
            return false;
        };

        self.binv.iter_mut().for_each(|v| *v = 0.0);
        for (c, &k) in dense.iter().enumerate() {
            for (r, &i) in free_rows.iter().enumerate() {
                self.binv[k * m + i] = inv[(c, r)];
            }
        }
        let mut coupling = vec![0.0; kk];
        for i in 0..m {
            let k = owner[i];
            if k == usize::MAX {
                continue;
            }
            let v = owner_val[i];
            self.binv[k * m + i] = 1.0 / v;
            let d: Vec<f64> = dense.iter().map(|&k2| self.entry(i, self.header[k2])).collect();
            if d.iter().all(|x| *x == 0.0) {
                continue;
            }
            coupling.iter_mut().for_each(|x| *x = 0.0);
            for (c, &dc) in d.iter().enumerate() {
                if dc != 0.0 {
                    for r in 0..kk {
                        coupling[r] += dc * inv[(c, r)];
                    }
                }
            }
            for (r, &ir) in free_rows.iter().enumerate() {
                self.binv[k * m + ir] = -coupling[r] / v;
            }
        }
        true
    }

    fn compute_basic_values(&mut self) {
        let (m, n) = (self.m, self.n);
        let mut rhs = vec![0.0; m];
        for j in 0..n {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                for (r, a) in rhs.iter_mut().zip(self.p.column(j)) {
                    *r -= a * xj;
                }
            }
        }
        for i in 0..m {
            if self.state[n + i] != VarState::Basic {
                rhs[i] += self.x[n + i];
            }
        }
        for k in 0..m {
            let row = &self.binv[k * m..(k + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            self.x[self.header[k]] = v;
        }
    }

    fn ftran(&self, q: usize) -> Vec<f64> {
        let m = self.m;
        if q < self.n {
            let col = self.p.column(q);
            (0..m)
                .map(|i| {
                    self.binv[i * m..(i + 1) * m]
                        .iter()
                        .zip(col)
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect()
        } else {
            let c = q - self.n;
            (0..m).map(|i| -self.binv[i * m + c]).collect()
        }
    }

    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &c) in cb.iter().enumerate() {
            if c != 0.0 {
                for (yk, b) in y.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                    *yk += c * b;
                }
            }
        }
        y
    }

    fn cost(&self, j: usize) -> f64 {
        if j < self.n {
            self.p.cost[j]
        } else {
            0.0
        }
    }

    /// Phase-1 cost vector over the basis, or `None` when primal feasible.
    fn phase_one_costs(&self) -> Option<Vec<f64>> {
        let ftol = self.opts.tol.feasibility;
        let mut any = false;
        let cb: Vec<f64> = self
            .header
            .iter()
            .map(|&j| {
                if self.x[j] < self.lower[j] - ftol {
                    any = true;
                    -1.0
                } else if self.x[j] > self.upper[j] + ftol {
                    any = true;
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        any.then_some(cb)
    }

    /// Entering variable and direction (+1 increase, -1 decrease).
    fn price(&self, y: &[f64], phase_one: bool, bland: bool) -> Option<(usize, f64)> {
        let dtol = self.opts.tol.optimality;
        let ftol = self.opts.tol.feasibility;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n + self.m {
            let st = self.state[j];
            if st == VarState::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let c = if phase_one { 0.0 } else { self.cost(j) };
            let d = c - self.column_dot(j, y);
            let dir = match st {
                VarState::AtLower if d < -dtol => 1.0,
                VarState::AtUpper if d > dtol => -1.0,
                VarState::Free if d < -dtol && self.x[j] < self.upper[j] - ftol => 1.0,
                VarState::Free if d > dtol && self.x[j] > self.lower[j] + ftol => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, bd)| d.abs() > bd) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Two-pass (Harris) ratio test. Returns the step length and its kind,
    /// or `None` if the direction is unbounded.
    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> Option<(f64, Step)> {
        let ftol = self.opts.tol.feasibility;
        let ptol = self.opts.pivot_tol;

        // (row, exact ratio, harris ratio, leaves at upper)
        let mut rows: Vec<(usize, f64, f64, bool)> = Vec::new();
        for (k, &a) in alpha.iter().enumerate() {
            if a.abs() < ptol {
                continue;
            }
            let rho = -dir * a;
            let j = self.header[k];
            let (v, lo, hi) = (self.x[j], self.lower[j], self.upper[j]);
            let hit = if rho < 0.0 {
                if v < lo - ftol {
                    None
                } else if v > hi + ftol {
                    Some((hi, true))
                } else if lo.is_finite() {
                    Some((lo, false))
                } else {
                    None
                }
            } else if v > hi + ftol {
                None
            } else if v < lo - ftol {
                Some((lo, false))
            } else if hi.is_finite() {
                Some((hi, true))
            } else {
                None
            };
            if let Some((target, to_upper)) = hit {
                let gap = (target - v) / rho;
                let relaxed = (target - v + rho.signum() * ftol) / rho;
                rows.push((k, gap.max(0.0), relaxed.max(0.0), to_upper));
            }
        }

        let flip = if dir > 0.0 {
            self.upper[q] - self.x[q]
        } else {
            self.x[q] - self.lower[q]
        };

        if rows.is_empty() {
            return flip.is_finite().then_some((flip, Step::Flip));
        }

        let chosen = if bland {
            let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
            rows.iter()
                .filter(|r| r.1 <= min + 1e-12)
                .min_by_key(|r| self.header[r.0])
                .copied()
        } else {
            let theta_max = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
            rows.iter()
                .filter(|r| r.1 <= theta_max)
                .max_by(|a, b| alpha[a.0].abs().total_cmp(&alpha[b.0].abs()))
                .copied()
        };
        let (row, theta, _, to_upper) = chosen.expect("ratio rows are nonempty");
        if flip <= theta {
            Some((flip, Step::Flip))
        } else {
            Some((theta, Step::Pivot { row, to_upper }))
        }
    }

    fn pivot(&mut self, row: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[row];
        let pivot_row: Vec<f64> = self.binv[row * m..(row + 1) * m]
            .iter()
            .map(|v| v / piv)
            .collect();
        for (i, &f) in alpha.iter().enumerate() {
            if i == row || f == 0.0 {
                continue;
            }
            for (b, p) in self.binv[i * m..(i + 1) * m].iter_mut().zip(&pivot_row) {
                *b -= f * p;
            }
        }
        self.binv[row * m..(row + 1) * m].copy_from_slice(&pivot_row);
        self.updates += 1;
    }

    fn iteration_limit(&self) -> usize {
        self.opts
            .max_iterations
            .unwrap_or_else(|| 20_000 + 50 * (self.m + self.n))
    }

    fn run(mut self) -> Result<LpSolution> {
        let limit = self.iteration_limit();
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut verified = false;

        loop {
            if self.updates >= self.opts.refactor_every {
                if !self.refactor() {
                    return Err(Error::Solver("basis became singular".into()));
                }
                self.compute_basic_values();
            }

            let phase_one = self.phase_one_costs();
            let cb = match &phase_one {
                Some(c) => c.clone(),
                None => self.header.iter().map(|&j| self.cost(j)).collect(),
            };
            let y = self.btran(&cb);

            let Some((q, dir)) = self.price(&y, phase_one.is_some(), bland) else {
                // Confirm on a fresh factorization before concluding.
                if !verified && self.updates > 0 {
                    verified = true;
                    if !self.refactor() {
                        return Err(Error::Solver("basis became singular".into()));
                    }
                    self.compute_basic_values();
                    continue;
                }
                let status = if phase_one.is_some() {
                    Status::Infeasible
                } else {
                    Status::Optimal
                };
                return Ok(self.finish(status, y));
            };
            verified = false;

            if self.iterations >= limit {
                return Err(Error::Solver(format!(
                    "simplex iteration limit {limit} reached"
                )));
            }
            self.iterations += 1;

            let alpha = self.ftran(q);
            let Some((theta, step)) = self.ratio_test(q, dir, &alpha, bland) else {
                if phase_one.is_some() {
                    return Err(Error::Solver("unbounded ray in phase 1".into()));
                }
                let y = self.btran(&cb);
                return Ok(self.finish(Status::Unbounded, y));
            };

            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate > self.opts.bland_after && !bland {
                    trace!("switching to Bland's rule after {degenerate} degenerate pivots");
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }

            let delta = dir * theta;
            for (k, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let j = self.header[k];
                    self.x[j] -= a * delta;
                }
            }
            match step {
                Step::Flip => {
                    if dir > 0.0 {
                        self.x[q] = self.upper[q];
                        self.state[q] = VarState::AtUpper;
                    } else {
                        self.x[q] = self.lower[q];
                        self.state[q] = VarState::AtLower;
                    }
                }
                Step::Pivot { row, to_upper } => {
                    self.x[q] += delta;
                    let leaving = self.header[row];
                    if to_upper {
                        self.x[leaving] = self.upper[leaving];
                        self.state[leaving] = VarState::AtUpper;
                    } else {
                        self.x[leaving] = self.lower[leaving];
                        self.state[leaving] = VarState::AtLower;
                    }
                    self.header[row] = q;
                    self.state[q] = VarState::Basic;
                    self.pivot(row, &alpha);
                }
            }
        }
    }

    fn finish(self, status: Status, y: Vec<f64>) -> LpSolution {
        let n = self.n;
        let x: Vec<f64> = self.x[..n].to_vec();
        let activity = self.p.activities(&x);
        let objective = x.iter().zip(&self.p.cost).map(|(a, b)| a * b).sum();
        let reduced_costs = (0..n)
            .map(|j| self.p.cost[j] - self.column_dot(j, &y))
            .collect();
        let basis = Basis {
            header: self.header,
            state: self.state,
            values: self.x,
            inverse: Some(Arc::new(self.binv)),
            updates: self.updates,
        };
        LpSolution {
            status,
            objective,
            x,
            activity,
            duals: y,
            reduced_costs,
            basis,
            iterations: self.iterations,
        }
    }
}
