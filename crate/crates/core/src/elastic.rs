//! Elastic LP models of linear systems.
//!
//! Every constraint gets nonnegative elastic variables that absorb its
//! violation: `a x + e >= b`, `a x - e <= b`, `a x + e⁺ - e⁻ = b`. In
//! [`ElasticMode::Full`] each finite variable bound becomes an elastic row as
//! well (`x_j + e >= l_j`, `x_j - e <= u_j`) and the variable itself is freed.
//! The objective is the sum of the elastic variables of all active
//! constraints, so `Z = 0` exactly when the active constraints are feasible.
//!
//! Removing a constraint frees its row and zeroes its elastic costs without
//! changing the LP's shape, so a basis from before the removal stays primal
//! feasible and can warm start the next solve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpSolution, SimplexSolver};
use crate::system::{LinearSystem, Sense};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElasticMode {
    /// Elasticize row constraints only.
    Standard,
    /// Elasticize row constraints and finite variable bounds.
    Full,
}

/// What an elastic-model constraint stands for in the original system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstraintRef {
    Row(usize),
    LowerBound(usize),
    UpperBound(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElasticModel {
    base: LinearSystem,
    mode: ElasticMode,
    lp: LpProblem,
    constraints: Vec<ConstraintRef>,
    elastic: Vec<Vec<usize>>,
    row_bounds: Vec<(f64, f64)>,
    removed: Vec<bool>,
}

impl ElasticModel {
    pub fn new(base: LinearSystem, mode: ElasticMode) -> Result<Self> {
        base.validate()?;
        let (m, n) = (base.num_rows(), base.num_vars());

        let mut constraints: Vec<ConstraintRef> = (0..m).map(ConstraintRef::Row).collect();
        if mode == ElasticMode::Full {
            for j in 0..n {
                if base.lower()[j].is_finite() {
                    constraints.push(ConstraintRef::LowerBound(j));
                }
                if base.upper()[j].is_finite() {
                    constraints.push(ConstraintRef::UpperBound(j));
                }
            }
        }

        let elastic_count: usize = (0..m)
            .map(|i| if base.senses()[i] == Sense::Eq { 2 } else { 1 })
            .sum::<usize>()
            + (constraints.len() - m);
        let rows = constraints.len();
        let mut lp = LpProblem::new(rows, n + elastic_count);

        for j in 0..n {
            match mode {
                ElasticMode::Standard => lp.set_col_bounds(j, base.lower()[j], base.upper()[j]),
                ElasticMode::Full => lp.set_col_bounds(j, f64::NEG_INFINITY, f64::INFINITY),
            }
        }

        let mut next = n;
        let mut elastic = Vec::with_capacity(rows);
        let mut row_bounds = Vec::with_capacity(rows);
        for (r, c) in constraints.iter().enumerate() {
            let (sense, rhs, signs): (Sense, f64, &[f64]) = match *c {
                ConstraintRef::Row(i) => {
                    for (j, &a) in base.row(i).iter().enumerate() {
                        lp.set_coeff(r, j, a);
                    }
                    let sense = base.senses()[i];
                    let signs: &[f64] = match sense {
                        Sense::Ge => &[1.0],
                        Sense::Le => &[-1.0],
                        Sense::Eq => &[1.0, -1.0],
                    };
                    (sense, base.rhs()[i], signs)
                }
                ConstraintRef::LowerBound(j) => {
                    lp.set_coeff(r, j, 1.0);
                    (Sense::Ge, base.lower()[j], &[1.0])
                }
                ConstraintRef::UpperBound(j) => {
                    lp.set_coeff(r, j, 1.0);
                    (Sense::Le, base.upper()[j], &[-1.0])
                }
            };
            let mut vars = Vec::with_capacity(signs.len());
            for &s in signs {
                lp.set_coeff(r, next, s);
                lp.cost[next] = 1.0;
                vars.push(next);
                next += 1;
            }
            lp.set_row_sense(r, sense, rhs);
            row_bounds.push((lp.row_lower[r], lp.row_upper[r]));
            elastic.push(vars);
        }

        Ok(ElasticModel {
            base,
            mode,
            lp,
            constraints,
            elastic,
            row_bounds,
            removed: vec![false; rows],
        })
    }

    pub fn base(&self) -> &LinearSystem {
        &self.base
    }

    pub fn mode(&self) -> ElasticMode {
        self.mode
    }

    pub fn lp(&self) -> &LpProblem {
        &self.lp
    }

    /// Number of removable constraints (rows, plus bounds in full mode).
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraint(&self, c: usize) -> ConstraintRef {
        self.constraints[c]
    }

    /// Elastic column indices of constraint `c` (one, or `e⁺, e⁻` for
    /// equalities).
    pub fn elastic_vars(&self, c: usize) -> &[usize] {
        &self.elastic[c]
    }

    /// Elastic columns of the bound constraints, keyed by what they bound.
    /// Empty in standard mode.
    pub fn bound_elastic_vars(&self) -> Vec<(ConstraintRef, usize)> {
        self.constraints
            .iter()
            .zip(&self.elastic)
            .filter(|(c, _)| !matches!(c, ConstraintRef::Row(_)))
            .map(|(c, e)| (*c, e[0]))
            .collect()
    }

    pub fn is_active(&self, c: usize) -> bool {
        !self.removed[c]
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.constraints.len()).filter(|&c| !self.removed[c])
    }

    pub fn removed(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.constraints.len()).filter(|&c| self.removed[c])
    }

    pub fn num_active(&self) -> usize {
        self.removed.iter().filter(|r| !**r).count()
    }

    /// Number of elastic variables still in the objective.
    pub fn num_active_elastic(&self) -> usize {
        self.active().map(|c| self.elastic[c].len()).sum()
    }

    pub fn remove(&mut self, c: usize) -> Result<()> {
        if c >= self.constraints.len() {
            return Err(Error::InvalidInput(format!("no constraint {c}")));
        }
        if self.removed[c] {
            return Err(Error::AlreadyRemoved(c));
        }
        self.removed[c] = true;
        self.lp.row_lower[c] = f64::NEG_INFINITY;
        self.lp.row_upper[c] = f64::INFINITY;
        for &e in &self.elastic[c] {
            self.lp.cost[e] = 0.0;
        }
        Ok(())
    }

    pub fn reinstate(&mut self, c: usize) -> Result<()> {
        if c >= self.constraints.len() {
            return Err(Error::InvalidInput(format!("no constraint {c}")));
        }
        if !self.removed[c] {
            return Err(Error::NotRemoved(c));
        }
        self.removed[c] = false;
        (self.lp.row_lower[c], self.lp.row_upper[c]) = self.row_bounds[c];
        for &e in &self.elastic[c] {
            self.lp.cost[e] = 1.0;
        }
        Ok(())
    }

    /// Elastic value of constraint `c` in `sol`; for equalities the larger
    /// of the pair.
    pub fn elastic_value(&self, sol: &LpSolution, c: usize) -> f64 {
        self.elastic[c]
            .iter()
            .map(|&e| sol.x[e])
            .fold(0.0, f64::max)
    }

    /// Values of the original variables in `sol`.
    pub fn primal<'s>(&self, sol: &'s LpSolution) -> &'s [f64] {
        &sol.x[..self.base.num_vars()]
    }

    /// The original system restricted to its active rows. Bounds are those
    /// of the base system, minus any bound removed in full mode.
    pub fn surviving_system(&self) -> LinearSystem {
        let rows: Vec<usize> = self
            .active()
            .filter_map(|c| match self.constraints[c] {
                ConstraintRef::Row(i) => Some(i),
                _ => None,
            })
            .collect();
        let sub = self.base.subsystem(&rows);
        if self.mode == ElasticMode::Standard {
            return sub;
        }
        let mut lower = vec![f64::NEG_INFINITY; self.base.num_vars()];
        let mut upper = vec![f64::INFINITY; self.base.num_vars()];
        for c in self.active() {
            match self.constraints[c] {
                ConstraintRef::LowerBound(j) => lower[j] = self.base.lower()[j],
                ConstraintRef::UpperBound(j) => upper[j] = self.base.upper()[j],
                ConstraintRef::Row(_) => {}
            }
        }
        let rows: Vec<Vec<f64>> = (0..sub.num_rows()).map(|i| sub.row(i).to_vec()).collect();
        LinearSystem::with_bounds(
            sub.num_vars(),
            rows,
            sub.senses().to_vec(),
            sub.rhs().to_vec(),
            lower,
            upper,
        )
        .expect("subsystem of a valid system is valid")
    }

    pub fn solve(&self, solver: &SimplexSolver) -> Result<LpSolution> {
        solver.solve(&self.lp, None)
    }
}

/// Minimum total violation `Z` of `sys` under a fresh standard elastic model.
pub fn elastic_objective(sys: &LinearSystem, solver: &SimplexSolver) -> Result<f64> {
    if sys.num_rows() == 0 {
        return Ok(0.0);
    }
    let model = ElasticModel::new(sys.clone(), ElasticMode::Standard)?;
    let sol = model.solve(solver)?;
    match sol.status {
        crate::lp::Status::Optimal => Ok(sol.objective),
        s => Err(Error::UnexpectedStatus(s)),
    }
}
