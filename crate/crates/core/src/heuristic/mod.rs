//! MAX FS heuristics over elastic models.
//!
//! [`solve_maxfs`] runs either the probing general algorithm (candidate
//! lists from Algorithm 1, 2 or 3, optionally limited to `k` entries) or,
//! with Extension 1, the single loop that removes a whole leading block of
//! the ranked list per iteration. Extension 2 adds an early exit when few
//! candidates remain.

mod candidates;
pub(crate) mod driver;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use candidates::{
    build_candidates_alg1, build_candidates_alg2, build_candidates_alg3, Candidate,
    CandidateKind, CandidateList,
};
pub(crate) use candidates::sort_desc;

use crate::changepoint::ChangePointDetector;
use crate::elastic::{ConstraintRef, ElasticModel};
use crate::error::Result;
use crate::lp::{Basis, LpSolution, SimplexSolver, Tolerances};
use driver::{EarlyExit, RemovalProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    Alg1,
    Alg2,
    Alg3,
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1" => Ok(Algorithm::Alg1),
            "2" => Ok(Algorithm::Alg2),
            "3" => Ok(Algorithm::Alg3),
            other => Err(format!("unknown algorithm `{other}`, expected 1, 2 or 3")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Algorithm::Alg1 => 1,
            Algorithm::Alg2 => 2,
            Algorithm::Alg3 => 3,
        };
        write!(f, "{n}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub algorithm: Algorithm,
    /// Candidate list limit `k`; `None` is unlimited.
    pub list_limit: Option<usize>,
    pub use_e1: bool,
    /// Extension 2 threshold `ℓ`.
    pub e2: Option<usize>,
    /// Apply the Extension 2 check only on the first iteration.
    pub e2_first_iteration_only: bool,
    pub tolerances: Tolerances,
    /// Change penalty factor for Extension 1.
    pub penalty_factor: f64,
    /// `None` means ten times the number of constraints.
    pub iteration_cap: Option<usize>,
}

impl StrategyConfig {
    pub fn new(algorithm: Algorithm, list_limit: Option<usize>) -> Self {
        StrategyConfig {
            algorithm,
            list_limit,
            use_e1: false,
            e2: None,
            e2_first_iteration_only: false,
            tolerances: Tolerances::default(),
            penalty_factor: 1.0,
            iteration_cap: None,
        }
    }

    pub fn with_e1(mut self) -> Self {
        self.use_e1 = true;
        self
    }

    pub fn with_e2(mut self, threshold: usize) -> Self {
        self.e2 = Some(threshold);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.list_limit == Some(0) {
            return Err(crate::Error::InvalidInput("list limit k must be at least 1".into()));
        }
        if self.e2 == Some(0) {
            return Err(crate::Error::InvalidInput("E2 threshold must be at least 1".into()));
        }
        Ok(())
    }

    /// Short label such as `2(inf)E1` or `3(2)`.
    pub fn label(&self) -> String {
        let k = self
            .list_limit
            .map_or_else(|| "inf".to_string(), |k| k.to_string());
        let mut s = format!("{}({k})", self.algorithm);
        if self.use_e1 {
            s.push_str("E1");
        }
        if let Some(l) = self.e2 {
            s.push_str(&format!("E2({l})"));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub entity: usize,
    pub iteration: usize,
    /// Objective after the removal took effect.
    pub z_after: f64,
}

/// Removed entities in removal order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RemovalLedger {
    entries: Vec<Removal>,
}

impl RemovalLedger {
    pub(crate) fn push(&mut self, entity: usize, iteration: usize, z_after: f64) {
        debug_assert!(self.entries.iter().all(|r| r.entity != entity));
        debug_assert!(self.entries.last().is_none_or(|r| r.iteration <= iteration));
        self.entries.push(Removal {
            entity,
            iteration,
            z_after,
        });
    }

    pub(crate) fn fill_pending(&mut self, z: f64) {
        for r in self.entries.iter_mut().rev() {
            if !r.z_after.is_nan() {
                break;
            }
            r.z_after = z;
        }
    }

    pub fn entries(&self) -> &[Removal] {
        &self.entries
    }

    pub fn entities(&self) -> Vec<usize> {
        self.entries.iter().map(|r| r.entity).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, entity: usize) -> bool {
        self.entries.iter().any(|r| r.entity == entity)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxFsResult {
    /// Removed constraints (the heuristic MIN ULR set) by elastic-model index.
    pub min_ulr: RemovalLedger,
    pub removed: Vec<ConstraintRef>,
    pub final_z: f64,
    pub lp_count: usize,
    pub iterations: usize,
    pub seconds: f64,
    /// Number of constraints removed at each iteration.
    pub removal_sizes: Vec<usize>,
    /// The run ended through the single-candidate or Extension 2 exit
    /// instead of a final solve.
    pub shortcut_exit: bool,
    /// Values of the original variables at the last LP solution; they
    /// satisfy every surviving constraint.
    pub x: Vec<f64>,
}

struct RowRemoval<'a> {
    model: &'a mut ElasticModel,
    solver: SimplexSolver,
    algorithm: Algorithm,
    limit: Option<usize>,
}

impl RemovalProblem for RowRemoval<'_> {
    fn solve(&mut self, warm: Option<&Basis>) -> Result<LpSolution> {
        self.solver.solve(self.model.lp(), warm)
    }

    fn candidates(&self, sol: &LpSolution) -> CandidateList {
        let tol = &self.solver.tol;
        match self.algorithm {
            Algorithm::Alg1 => build_candidates_alg1(sol, self.model, self.limit, tol),
            Algorithm::Alg2 => build_candidates_alg2(sol, self.model, self.limit, tol),
            Algorithm::Alg3 => build_candidates_alg3(sol, self.model, self.limit, tol),
        }
    }

    fn remove(&mut self, entity: usize) {
        self.model.remove(entity).expect("candidates are active");
    }

    fn reinstate(&mut self, entity: usize) {
        self.model.reinstate(entity).expect("probed candidate was removed");
    }

    fn is_done(&self, sol: &LpSolution) -> bool {
        sol.objective <= self.solver.tol.zero_objective
    }

    fn certify(&self, sol: &LpSolution, entities: &[usize]) -> Option<f64> {
        let residual: f64 = self
            .model
            .active()
            .filter(|c| !entities.contains(c))
            .flat_map(|c| self.model.elastic_vars(c))
            .map(|&e| sol.x[e])
            .sum();
        (residual <= self.solver.tol.zero_objective).then_some(residual)
    }
}

/// Runs the MAX FS heuristic described by `cfg` on `model`. On return the
/// model has the MIN ULR constraints removed.
pub fn solve_maxfs(model: &mut ElasticModel, cfg: &StrategyConfig) -> Result<MaxFsResult> {
    cfg.validate()?;
    let cap = cfg
        .iteration_cap
        .unwrap_or_else(|| 10 * model.num_constraints().max(1));
    let early = cfg.e2.map(|threshold| EarlyExit {
        threshold,
        first_iteration_only: cfg.e2_first_iteration_only,
    });
    let num_vars = model.base().num_vars();
    let mut problem = RowRemoval {
        model,
        solver: SimplexSolver::new(cfg.tolerances),
        algorithm: cfg.algorithm,
        limit: cfg.list_limit,
    };
    let out = if cfg.use_e1 {
        let detector = ChangePointDetector::new(cfg.penalty_factor);
        driver::run_batched(&mut problem, &detector, early, true, cap)?
    } else {
        driver::run_probing(&mut problem, early, cap)?
    };
    let removed = out
        .ledger
        .entities()
        .into_iter()
        .map(|c| problem.model.constraint(c))
        .collect();
    Ok(MaxFsResult {
        removed,
        final_z: out.final_objective,
        lp_count: out.lp_count,
        iterations: out.iterations,
        seconds: out.seconds,
        removal_sizes: out.removal_sizes,
        shortcut_exit: out.shortcut_exit,
        x: out.solution.x[..num_vars].to_vec(),
        min_ulr: out.ledger,
    })
}
