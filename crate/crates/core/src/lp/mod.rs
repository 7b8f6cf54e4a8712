//! Dense linear programming.
//!
//! Problems are stored in the bounded form
//!
//! ```text
//!     min  c'x
//!     s.t. row_lower <= A x <= row_upper
//!          col_lower <=   x <= col_upper
//! ```
//!
//! with any bound allowed to be infinite. The solver is a bounded-variable
//! revised simplex over a dense explicit basis inverse (see [`simplex`]).
//! Every solve returns a [`Basis`] that can be passed back to warm start a
//! later solve of a problem with the same shape.

mod format;
pub mod simplex;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use format::write_lp_format;
pub use simplex::SimplexSolver;

use crate::error::{Error, Result};
use crate::system::Sense;

/// Solver tolerances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute primal feasibility tolerance on rows and bounds.
    pub feasibility: f64,
    /// Absolute tolerance on reduced costs and dual prices.
    pub optimality: f64,
    /// Objective values at or below this count as `Z = 0`.
    pub zero_objective: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-8,
            optimality: 1e-8,
            zero_objective: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A dense LP in bounded form. The matrix is stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    num_rows: usize,
    num_cols: usize,
    matrix: Vec<f64>,
    pub cost: Vec<f64>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
}

impl LpProblem {
    /// An all-zero problem: rows are free, columns are nonnegative.
    pub fn new(num_rows: usize, num_cols: usize) -> Self {
        LpProblem {
            num_rows,
            num_cols,
            matrix: vec![0.0; num_rows * num_cols],
            cost: vec![0.0; num_cols],
            col_lower: vec![0.0; num_cols],
            col_upper: vec![f64::INFINITY; num_cols],
            row_lower: vec![f64::NEG_INFINITY; num_rows],
            row_upper: vec![f64::INFINITY; num_rows],
        }
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    #[inline]
    pub fn coeff(&self, row: usize, col: usize) -> f64 {
        self.matrix[col * self.num_rows + row]
    }

    #[inline]
    pub fn set_coeff(&mut self, row: usize, col: usize, value: f64) {
        self.matrix[col * self.num_rows + row] = value;
    }

    #[inline]
    pub fn column(&self, col: usize) -> &[f64] {
        &self.matrix[col * self.num_rows..(col + 1) * self.num_rows]
    }

    /// Sets row `row` to `a x (sense) rhs`.
    pub fn set_row_sense(&mut self, row: usize, sense: Sense, rhs: f64) {
        let (lo, hi) = match sense {
            Sense::Le => (f64::NEG_INFINITY, rhs),
            Sense::Eq => (rhs, rhs),
            Sense::Ge => (rhs, f64::INFINITY),
        };
        self.row_lower[row] = lo;
        self.row_upper[row] = hi;
    }

    pub fn set_col_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.col_lower[col] = lower;
        self.col_upper[col] = upper;
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.num_rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (a, &c) in act.iter_mut().zip(self.column(j)) {
                    *a += c * xj;
                }
            }
        }
        act
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_cols {
            worst = worst
                .max(self.col_lower[j] - x[j])
                .max(x[j] - self.col_upper[j]);
        }
        for (i, a) in self.activities(x).into_iter().enumerate() {
            worst = worst
                .max(self.row_lower[i] - a)
                .max(a - self.row_upper[i]);
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        if self.matrix.len() != self.num_rows * self.num_cols
            || self.cost.len() != self.num_cols
            || self.col_lower.len() != self.num_cols
            || self.col_upper.len() != self.num_cols
            || self.row_lower.len() != self.num_rows
            || self.row_upper.len() != self.num_rows
        {
            return Err(Error::InvalidInput("LP dimensions are inconsistent".into()));
        }
        for j in 0..self.num_cols {
            if self.col_lower[j] > self.col_upper[j] || self.col_lower[j].is_nan() {
                return Err(Error::InvalidInput(format!("column {j} has crossed bounds")));
            }
        }
        for i in 0..self.num_rows {
            if self.row_lower[i] > self.row_upper[i] || self.row_lower[i].is_nan() {
                return Err(Error::InvalidInput(format!("row {i} has crossed bounds")));
            }
        }
        Ok(())
    }
}

/// Position of a nonbasic variable, or `Basic`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic and held at its current value, strictly inside its bounds
    /// (typically a free variable).
    Free,
}

/// Warm-start token: basis header, nonbasic positions and, when available,
/// the basis inverse that went with them.
#[derive(Clone, Debug)]
pub struct Basis {
    pub(crate) header: Vec<usize>,
    pub(crate) state: Vec<VarState>,
    pub(crate) values: Vec<f64>,
    pub(crate) inverse: Option<Arc<Vec<f64>>>,
    pub(crate) updates: usize,
}

impl Basis {
    /// Column indices of the basic variables; indices `>= num_cols` denote
    /// row logicals.
    pub fn basic_variables(&self) -> &[usize] {
        &self.header
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: Status,
    pub objective: f64,
    pub x: Vec<f64>,
    /// Row activities `A x`.
    pub activity: Vec<f64>,
    /// Dual prices, one per row. Under minimization a `>=` row has a
    /// nonnegative price and a `<=` row a nonpositive one; the magnitude is
    /// the objective's sensitivity to the row's right-hand side.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub basis: Basis,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// A temporary modification used by [`objective_delta_probe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Deactivation {
    /// Free the row: both row bounds become infinite.
    Row(usize),
    /// Drop the column from the objective.
    Column(usize),
}

/// Optimal objective of `problem` with one row or column deactivated.
///
/// The problem is modified in place for the solve and restored before
/// returning, so callers observe no change.
pub fn objective_delta_probe(
    solver: &SimplexSolver,
    problem: &mut LpProblem,
    warm: Option<&Basis>,
    change: Deactivation,
) -> Result<f64> {
    let sol = match change {
        Deactivation::Row(i) => {
            let saved = (problem.row_lower[i], problem.row_upper[i]);
            problem.row_lower[i] = f64::NEG_INFINITY;
            problem.row_upper[i] = f64::INFINITY;
            let sol = solver.solve(problem, warm);
            problem.row_lower[i] = saved.0;
            problem.row_upper[i] = saved.1;
            sol?
        }
        Deactivation::Column(j) => {
            let saved = problem.cost[j];
            problem.cost[j] = 0.0;
            let sol = solver.solve(problem, warm);
            problem.cost[j] = saved;
            sol?
        }
    };
    match sol.status {
        Status::Optimal => Ok(sol.objective),
        s => Err(Error::UnexpectedStatus(s)),
    }
}
