//! Sparse solutions of underdetermined systems `A y = b` in free variables.
//!
//! Every method treats the variables as MAX FS candidates. The split
//! formulation writes `y = u - v` with `u, v >= 0` and minimizes the
//! weighted sum of the pairs; moving a variable into the MIN ULR set lowers
//! its pair weight (to 0 for the reference method, to 0.1 for the B
//! family). The zeroing formulation keeps `y` free and adds a row
//! `y_j + e⁺_j - e⁻_j = 0` per variable whose elastic pair carries the
//! objective.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::changepoint::ChangePointDetector;
use crate::elastic::elastic_objective;
use crate::error::{Error, Result};
use crate::heuristic::driver::{self, EarlyExit, Outcome, RemovalProblem};
use crate::heuristic::{sort_desc, Candidate, CandidateKind, CandidateList};
use crate::lp::{Basis, LpProblem, LpSolution, SimplexSolver, Status, Tolerances};
use crate::system::{LinearSystem, Sense};

/// Pair weight of a variable outside the MIN ULR set.
const FULL_COST: f64 = 1.0;
/// Pair weight of a MIN ULR variable in the B family.
const REDUCED_COST: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryProblem {
    m: usize,
    n: usize,
    /// Row-major `m x n`.
    a: Vec<f64>,
    b: Vec<f64>,
    pub tolerances: Tolerances,
    /// Values with magnitude at or below this count as zero.
    pub zero_tol: f64,
}

impl RecoveryProblem {
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(Error::InvalidInput(format!(
                "need an underdetermined system with 0 < m < n, got {m} x {n}"
            )));
        }
        if a.len() != m * n || b.len() != m {
            return Err(Error::InvalidInput(format!(
                "{m} x {n} matrix needs {} entries and {m} right-hand sides, got {} and {}",
                m * n,
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix and right-hand side must be finite".into()));
        }
        Ok(RecoveryProblem {
            m,
            n,
            a,
            b,
            tolerances: Tolerances::default(),
            zero_tol: 1e-7,
        })
    }

    /// Takes the coefficient matrix of `sys` (senses and right-hand sides are
    /// ignored) together with a separate right-hand side.
    pub fn from_system(sys: &LinearSystem, b: Vec<f64>) -> Result<Self> {
        let a = (0..sys.num_rows()).flat_map(|i| sys.row(i).to_vec()).collect();
        Self::new(sys.num_rows(), sys.num_vars(), a, b)
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `‖A y - b‖∞`.
    pub fn residual(&self, y: &[f64]) -> f64 {
        (0..self.m)
            .map(|i| {
                let ay: f64 = (0..self.n).map(|j| self.a(i, j) * y[j]).sum();
                (ay - self.b[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    fn solver(&self) -> SimplexSolver {
        SimplexSolver::new(self.tolerances)
    }

    fn support_of(&self, y: &[f64]) -> Vec<usize> {
        (0..self.n).filter(|&j| y[j].abs() > self.zero_tol).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryResult {
    /// Indices of the nonzero entries of `y`.
    pub support: Vec<usize>,
    pub y: Vec<f64>,
    /// Estimated sparsity, `|support|`.
    pub t: usize,
    pub lp_count: usize,
    pub bp_shortcut_taken: bool,
    /// Variables moved into the MIN ULR set, in order.
    pub min_ulr: Vec<usize>,
    pub seconds: f64,
}

/// Split-variable LP: `min Σ c_j (u_j + v_j)` s.t. `A (u - v) = b`,
/// `u, v >= 0`. Column `j` is `u_j`, column `n + j` is `v_j`.
#[derive(Clone, Debug)]
pub struct SplitVarLp {
    lp: LpProblem,
    n: usize,
    minulr: BTreeSet<usize>,
}

impl SplitVarLp {
    pub fn new(p: &RecoveryProblem) -> Self {
        let (m, n) = (p.m, p.n);
        let mut lp = LpProblem::new(m, 2 * n);
        for j in 0..n {
            for i in 0..m {
                lp.set_coeff(i, j, p.a(i, j));
                lp.set_coeff(i, n + j, -p.a(i, j));
            }
            lp.cost[j] = FULL_COST;
            lp.cost[n + j] = FULL_COST;
        }
        for i in 0..m {
            lp.set_row_sense(i, Sense::Eq, p.b[i]);
        }
        SplitVarLp {
            lp,
            n,
            minulr: BTreeSet::new(),
        }
    }

    pub fn lp(&self) -> &LpProblem {
        &self.lp
    }

    pub fn pair_cost(&self, j: usize) -> f64 {
        self.lp.cost[j]
    }

    pub fn minulr_vars(&self) -> &BTreeSet<usize> {
        &self.minulr
    }

    fn set_pair_cost(&mut self, j: usize, c: f64) {
        self.lp.cost[j] = c;
        self.lp.cost[self.n + j] = c;
    }

    /// `y = u - v`.
    pub fn signal(&self, sol: &LpSolution) -> Vec<f64> {
        (0..self.n).map(|j| sol.x[j] - sol.x[self.n + j]).collect()
    }
}

/// Zeroing LP: `min Σ (e⁺_j + e⁻_j)` s.t. `A y = b`, `y_j + e⁺_j - e⁻_j = 0`,
/// `y` free. Columns are `y`, then `e⁺`, then `e⁻`; rows `m..m+n` are the
/// zeroing rows.
#[derive(Clone, Debug)]
pub struct ZeroingLp {
    lp: LpProblem,
    m: usize,
    n: usize,
    minulr: BTreeSet<usize>,
}

impl ZeroingLp {
    pub fn new(p: &RecoveryProblem) -> Self {
        let (m, n) = (p.m, p.n);
        let mut lp = LpProblem::new(m + n, 3 * n);
        for j in 0..n {
            for i in 0..m {
                lp.set_coeff(i, j, p.a(i, j));
            }
            lp.set_col_bounds(j, f64::NEG_INFINITY, f64::INFINITY);
            lp.set_coeff(m + j, j, 1.0);
            lp.set_coeff(m + j, n + j, 1.0);
            lp.set_coeff(m + j, 2 * n + j, -1.0);
            lp.cost[n + j] = FULL_COST;
            lp.cost[2 * n + j] = FULL_COST;
            lp.set_row_sense(m + j, Sense::Eq, 0.0);
        }
        for i in 0..m {
            lp.set_row_sense(i, Sense::Eq, p.b[i]);
        }
        ZeroingLp {
            lp,
            m,
            n,
            minulr: BTreeSet::new(),
        }
    }

    pub fn lp(&self) -> &LpProblem {
        &self.lp
    }

    pub fn minulr_vars(&self) -> &BTreeSet<usize> {
        &self.minulr
    }

    fn set_elastic_cost(&mut self, j: usize, c: f64) {
        self.lp.cost[self.n + j] = c;
        self.lp.cost[2 * self.n + j] = c;
    }

    pub fn signal(&self, sol: &LpSolution) -> Vec<f64> {
        sol.x[..self.n].to_vec()
    }

    fn zeroing_dual(&self, sol: &LpSolution, j: usize) -> f64 {
        sol.duals[self.m + j]
    }
}

fn solve_checked(solver: &SimplexSolver, lp: &LpProblem, warm: Option<&Basis>) -> Result<LpSolution> {
    let sol = solver.solve(lp, warm)?;
    if sol.status == Status::Infeasible {
        return Err(Error::InvalidInput(
            "right-hand side is not in the range of the matrix".into(),
        ));
    }
    Ok(sol)
}

fn magnitude_candidates(
    y: &[f64],
    minulr: &BTreeSet<usize>,
    zero_tol: f64,
) -> Vec<Candidate> {
    y.iter()
        .enumerate()
        .filter(|&(j, v)| v.abs() > zero_tol && !minulr.contains(&j))
        .map(|(j, v)| Candidate {
            entity: j,
            score: v.abs(),
            kind: CandidateKind::VariableMagnitude,
        })
        .collect()
}

/// Candidate removal over the split LP. `removed_cost` is the pair weight
/// of MIN ULR variables: 0 for the reference method, 0.1 for the B family.
struct SplitRemoval<'a> {
    split: SplitVarLp,
    solver: SimplexSolver,
    problem: &'a RecoveryProblem,
    removed_cost: f64,
    limit: Option<usize>,
}

impl RemovalProblem for SplitRemoval<'_> {
    fn solve(&mut self, warm: Option<&Basis>) -> Result<LpSolution> {
        solve_checked(&self.solver, &self.split.lp, warm)
    }

    fn candidates(&self, sol: &LpSolution) -> CandidateList {
        let y = self.split.signal(sol);
        CandidateList::single(
            magnitude_candidates(&y, &self.split.minulr, self.problem.zero_tol),
            self.limit,
        )
    }

    fn remove(&mut self, j: usize) {
        debug_assert!(!self.split.minulr.contains(&j));
        self.split.minulr.insert(j);
        self.split.set_pair_cost(j, self.removed_cost);
    }

    fn reinstate(&mut self, j: usize) {
        self.split.minulr.remove(&j);
        self.split.set_pair_cost(j, FULL_COST);
    }

    fn is_done(&self, sol: &LpSolution) -> bool {
        self.removed_cost == 0.0 && sol.objective <= self.solver.tol.zero_objective
    }

    fn certify(&self, sol: &LpSolution, entities: &[usize]) -> Option<f64> {
        let y = self.split.signal(sol);
        let mut z = 0.0;
        for (j, v) in y.iter().enumerate() {
            let weight = if self.split.minulr.contains(&j) || entities.contains(&j) {
                self.removed_cost
            } else if v.abs() > self.problem.zero_tol {
                return None;
            } else {
                FULL_COST
            };
            z += weight * (sol.x[j] + sol.x[self.split.n + j]);
        }
        Some(z)
    }

    fn empty_list_is_exit(&self) -> bool {
        true
    }
}

struct ZeroingRemoval<'a> {
    zl: ZeroingLp,
    solver: SimplexSolver,
    problem: &'a RecoveryProblem,
    limit: Option<usize>,
}

impl RemovalProblem for ZeroingRemoval<'_> {
    fn solve(&mut self, warm: Option<&Basis>) -> Result<LpSolution> {
        solve_checked(&self.solver, &self.zl.lp, warm)
    }

    fn candidates(&self, sol: &LpSolution) -> CandidateList {
        let y = self.zl.signal(sol);
        let mut by_value = magnitude_candidates(&y, &self.zl.minulr, self.problem.zero_tol);
        let mut by_dual: Vec<Candidate> = (0..self.zl.n)
            .filter(|&j| !self.zl.minulr.contains(&j) && y[j].abs() <= self.problem.zero_tol)
            .map(|j| (j, self.zl.zeroing_dual(sol, j).abs()))
            .filter(|&(_, d)| d > self.solver.tol.optimality)
            .map(|(j, d)| Candidate {
                entity: j,
                score: d,
                kind: CandidateKind::DualSensitivity,
            })
            .collect();
        sort_desc(&mut by_value);
        sort_desc(&mut by_dual);
        let take = |v: &[Candidate]| match self.limit {
            Some(k) => v.iter().take(k).copied().collect::<Vec<_>>(),
            None => v.to_vec(),
        };
        let mut ranked = take(&by_value);
        ranked.extend(take(&by_dual));
        by_value.extend(by_dual);
        CandidateList {
            ranked,
            all: by_value,
        }
    }

    fn remove(&mut self, j: usize) {
        self.zl.minulr.insert(j);
        self.zl.set_elastic_cost(j, 0.0);
    }

    fn reinstate(&mut self, j: usize) {
        self.zl.minulr.remove(&j);
        self.zl.set_elastic_cost(j, FULL_COST);
    }

    fn is_done(&self, sol: &LpSolution) -> bool {
        sol.objective <= self.solver.tol.zero_objective
    }

    fn certify(&self, sol: &LpSolution, entities: &[usize]) -> Option<f64> {
        let n = self.zl.n;
        let residual: f64 = (0..n)
            .filter(|j| !self.zl.minulr.contains(j) && !entities.contains(j))
            .map(|j| sol.x[n + j] + sol.x[2 * n + j])
            .sum();
        (residual <= self.solver.tol.zero_objective).then_some(residual)
    }
}

fn cap(p: &RecoveryProblem) -> usize {
    10 * p.n
}

fn finish(
    p: &RecoveryProblem,
    y: Vec<f64>,
    out: &Outcome,
    bp_shortcut_taken: bool,
) -> RecoveryResult {
    let support = p.support_of(&y);
    RecoveryResult {
        t: support.len(),
        support,
        y,
        lp_count: out.lp_count,
        bp_shortcut_taken,
        min_ulr: out.ledger.entities(),
        seconds: out.seconds,
    }
}

fn run_split(
    p: &RecoveryProblem,
    removed_cost: f64,
    limit: Option<usize>,
    batched: Option<usize>,
) -> Result<RecoveryResult> {
    if limit == Some(0) {
        return Err(Error::InvalidInput("list limit k must be at least 1".into()));
    }
    let mut rp = SplitRemoval {
        split: SplitVarLp::new(p),
        solver: p.solver(),
        problem: p,
        removed_cost,
        limit,
    };
    let out = match batched {
        Some(ell) => {
            let early = EarlyExit {
                threshold: ell,
                first_iteration_only: true,
            };
            driver::run_batched(&mut rp, &ChangePointDetector::default(), Some(early), false, cap(p))?
        }
        None => driver::run_probing(&mut rp, None, cap(p))?,
    };
    let y = rp.split.signal(&out.solution);
    let shortcut = batched.is_some() && out.iterations == 1 && out.shortcut_exit;
    Ok(finish(p, y, &out, shortcut))
}

/// One solve of the split LP (`ℓ1` minimization).
pub fn basis_pursuit(p: &RecoveryProblem) -> Result<RecoveryResult> {
    let start = Instant::now();
    let split = SplitVarLp::new(p);
    let sol = solve_checked(&p.solver(), &split.lp, None)?;
    let y = split.signal(&sol);
    let support = p.support_of(&y);
    Ok(RecoveryResult {
        t: support.len(),
        min_ulr: support.clone(),
        support,
        y,
        lp_count: 1,
        bp_shortcut_taken: false,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// The reference split-variable MAX FS loop: MIN ULR pair weights drop to
/// zero, exit at `Z = 0`.
pub fn method_jp(p: &RecoveryProblem, k: Option<usize>) -> Result<RecoveryResult> {
    run_split(p, 0.0, k, None)
}

/// MIN ULR pair weights drop to 0.1; exit when no candidate is left.
pub fn method_b(p: &RecoveryProblem, k: Option<usize>) -> Result<RecoveryResult> {
    run_split(p, REDUCED_COST, k, None)
}

/// Zeroing-row formulation with a magnitude list and a dual-price list.
pub fn method_c(p: &RecoveryProblem, k: Option<usize>) -> Result<RecoveryResult> {
    if k == Some(0) {
        return Err(Error::InvalidInput("list limit k must be at least 1".into()));
    }
    let mut rp = ZeroingRemoval {
        zl: ZeroingLp::new(p),
        solver: p.solver(),
        problem: p,
        limit: k,
    };
    let out = driver::run_probing(&mut rp, None, cap(p))?;
    let y = rp.zl.signal(&out.solution);
    Ok(finish(p, y, &out, false))
}

/// Basis pursuit if its support is smaller than `m - 3`, otherwise
/// Method B. Method B starts with the same solve, so it is not repeated.
pub fn method_m(p: &RecoveryProblem, k: Option<usize>) -> Result<RecoveryResult> {
    let bp = basis_pursuit(p)?;
    if bp.t + 3 < p.m {
        return Ok(RecoveryResult {
            bp_shortcut_taken: true,
            ..bp
        });
    }
    let mut r = method_b(p, k)?;
    r.seconds += bp.seconds;
    Ok(r)
}

/// Single-loop B-family method with change-point batches and a
/// first-iteration exit when at most `ell` candidates exist.
pub fn method_me1e2(p: &RecoveryProblem, ell: usize) -> Result<RecoveryResult> {
    if ell == 0 {
        return Err(Error::InvalidInput("threshold must be at least 1".into()));
    }
    run_split(p, REDUCED_COST, None, Some(ell))
}

/// Default threshold `m - 3`, at least 1.
pub fn default_ell(p: &RecoveryProblem) -> usize {
    p.m.saturating_sub(3).max(1)
}

/// Drops support variables that are not needed: each in turn is forced to
/// zero and kept out if `A y = b` is still solvable on the remaining
/// columns.
pub fn postprocess(p: &RecoveryProblem, support: &[usize]) -> Result<Vec<usize>> {
    let solver = p.solver();
    let mut kept: Vec<usize> = support.to_vec();
    let mut idx = 0;
    while idx < kept.len() {
        let trial: Vec<usize> = kept.iter().copied().filter(|&j| j != kept[idx]).collect();
        if restricted_feasible(p, &trial, &solver)? {
            kept = trial;
        } else {
            idx += 1;
        }
    }
    Ok(kept)
}

fn restricted_system(p: &RecoveryProblem, cols: &[usize]) -> Result<LinearSystem> {
    let rows = (0..p.m)
        .map(|i| cols.iter().map(|&j| p.a(i, j)).collect())
        .collect();
    LinearSystem::new(cols.len(), rows, vec![Sense::Eq; p.m], p.b.clone())
}

fn restricted_feasible(p: &RecoveryProblem, cols: &[usize], solver: &SimplexSolver) -> Result<bool> {
    if cols.is_empty() {
        return Ok(p.b.iter().all(|v| v.abs() <= p.tolerances.feasibility));
    }
    let z = elastic_objective(&restricted_system(p, cols)?, solver)?;
    Ok(z <= p.tolerances.zero_objective)
}

/// A solution of `A y = b` using only the columns in `support`.
pub fn solve_on_support(p: &RecoveryProblem, support: &[usize]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; p.n];
    if support.is_empty() {
        return Ok(y);
    }
    let mut lp = LpProblem::new(p.m, support.len());
    for (c, &j) in support.iter().enumerate() {
        lp.set_col_bounds(c, f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..p.m {
            lp.set_coeff(i, c, p.a(i, j));
        }
    }
    for i in 0..p.m {
        lp.set_row_sense(i, Sense::Eq, p.b[i]);
    }
    let sol = solve_checked(&p.solver(), &lp, None)?;
    for (c, &j) in support.iter().enumerate() {
        y[j] = sol.x[c];
    }
    Ok(y)
}

/// Postprocesses `r` and recomputes its signal on the reduced support.
pub fn postprocess_result(p: &RecoveryProblem, r: RecoveryResult) -> Result<RecoveryResult> {
    let kept = postprocess(p, &r.support)?;
    if kept.len() == r.support.len() {
        return Ok(r);
    }
    let y = solve_on_support(p, &kept)?;
    let support = p.support_of(&y);
    Ok(RecoveryResult {
        t: support.len(),
        support,
        y,
        ..r
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bp,
    B,
    C,
    M,
    Me1e2,
    Jp,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Bp,
        Method::B,
        Method::C,
        Method::M,
        Method::Me1e2,
        Method::Jp,
    ];

    /// Runs the method. `k` is the list limit for B, C, M and the reference
    /// method; `ell` is the ME1E2 threshold (default `m - 3`).
    pub fn run(self, p: &RecoveryProblem, k: Option<usize>, ell: Option<usize>) -> Result<RecoveryResult> {
        match self {
            Method::Bp => basis_pursuit(p),
            Method::B => method_b(p, k),
            Method::C => method_c(p, k),
            Method::M => method_m(p, k),
            Method::Me1e2 => method_me1e2(p, ell.unwrap_or_else(|| default_ell(p))),
            Method::Jp => method_jp(p, k),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Bp => "bp",
            Method::B => "b",
            Method::C => "c",
            Method::M => "m",
            Method::Me1e2 => "me1e2",
            Method::Jp => "jp",
        };
        f.write_str(s)
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}`, expected one of bp, b, c, m, me1e2, jp"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RecoveryProblem {
        RecoveryProblem::new(2, 3, vec![1., 0., 0., 0., 1., 0.], vec![1., 0.]).unwrap()
    }

    #[test]
    fn basis_pursuit_on_coordinate_rows() {
        let r = basis_pursuit(&small()).unwrap();
        assert_eq!(r.support, vec![0]);
        assert!((r.y[0] - 1.0).abs() < 1e-9);
        assert_eq!(r.t, 1);
    }

    #[test]
    fn zero_rhs_gives_empty_support() {
        let p = RecoveryProblem::new(2, 3, vec![1., 2., 3., 4., 5., 6.], vec![0., 0.]).unwrap();
        for m in Method::ALL {
            let r = m.run(&p, Some(2), None).unwrap();
            assert_eq!(r.t, 0, "{m}");
            assert_eq!(r.lp_count, 1, "{m}");
        }
        // with m = 2 the m - 3 threshold is negative, so M falls through to B
        assert!(!method_m(&p, Some(2)).unwrap().bp_shortcut_taken);
        let a = (0..30).map(|v| (v % 7) as f64 - 3.0).collect();
        let wide = RecoveryProblem::new(5, 6, a, vec![0.; 5]).unwrap();
        let r = method_m(&wide, Some(2)).unwrap();
        assert!(r.bp_shortcut_taken);
        assert_eq!((r.t, r.lp_count), (0, 1));
    }

    #[test]
    fn rejects_square_and_ragged_input() {
        assert!(RecoveryProblem::new(2, 2, vec![1.; 4], vec![0.; 2]).is_err());
        assert!(RecoveryProblem::new(2, 3, vec![1.; 5], vec![0.; 2]).is_err());
    }

    #[test]
    fn inconsistent_rhs_is_an_input_error() {
        // rows are multiples of each other with incompatible right-hand sides
        let p = RecoveryProblem::new(2, 3, vec![1., 1., 1., 2., 2., 2.], vec![1., 3.]).unwrap();
        let err = basis_pursuit(&p).unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn postprocess_drops_dependent_column() {
        // column 2 = column 0 + column 1, b = column 2
        let p = RecoveryProblem::new(2, 4, vec![1., 0., 1., 0., 0., 1., 1., 0.], vec![1., 1.])
            .unwrap();
        let kept = postprocess(&p, &[0, 1, 2]).unwrap();
        assert_eq!(kept, vec![2]);
        assert!(p.residual(&solve_on_support(&p, &kept).unwrap()) < 1e-9);
        assert_eq!(postprocess(&p, &[2]).unwrap(), vec![2]);
        let z = RecoveryProblem::new(2, 4, vec![1.; 8], vec![0., 0.]).unwrap();
        assert!(postprocess(&z, &[]).unwrap().is_empty());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
    }
}
