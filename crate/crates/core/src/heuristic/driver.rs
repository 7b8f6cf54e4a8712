//! The two removal loops shared by every MAX FS variant: the probing
//! outer/inner loop of the general algorithm and the single loop of
//! Extension 1. They work on anything implementing [`RemovalProblem`], which
//! covers constraint removal in elastic models as well as the
//! variable-as-candidate sparse-recovery methods.

use std::time::Instant;

use log::debug;

use super::candidates::CandidateList;
use super::RemovalLedger;
use crate::changepoint::ChangePointDetector;
use crate::error::{Error, Result};
use crate::lp::{Basis, LpSolution, Status};

pub(crate) trait RemovalProblem {
    fn solve(&mut self, warm: Option<&Basis>) -> Result<LpSolution>;

    fn candidates(&self, sol: &LpSolution) -> CandidateList;

    fn remove(&mut self, entity: usize);

    fn reinstate(&mut self, entity: usize);

    /// Whether `sol` already solves the problem (for elastic models, `Z = 0`).
    fn is_done(&self, sol: &LpSolution) -> bool;

    /// If removing `entities` would leave `sol` itself a finished solution,
    /// the objective it would then have.
    fn certify(&self, sol: &LpSolution, entities: &[usize]) -> Option<f64>;

    /// Whether an empty candidate list ends the run normally. Otherwise it
    /// is reported as [`Error::NoCandidates`].
    fn empty_list_is_exit(&self) -> bool {
        false
    }
}

pub(crate) struct Outcome {
    pub ledger: RemovalLedger,
    pub solution: LpSolution,
    pub final_objective: f64,
    pub lp_count: usize,
    pub iterations: usize,
    pub removal_sizes: Vec<usize>,
    pub shortcut_exit: bool,
    pub seconds: f64,
}

struct Tracker {
    ledger: RemovalLedger,
    lp_count: usize,
    iterations: usize,
    removal_sizes: Vec<usize>,
    start: Instant,
}

impl Tracker {
    fn new() -> Self {
        Tracker {
            ledger: RemovalLedger::default(),
            lp_count: 0,
            iterations: 0,
            removal_sizes: Vec::new(),
            start: Instant::now(),
        }
    }

    fn solve<P: RemovalProblem>(&mut self, p: &mut P, warm: Option<&Basis>) -> Result<LpSolution> {
        let sol = p.solve(warm)?;
        self.lp_count += 1;
        match sol.status {
            Status::Optimal => {
                self.ledger.fill_pending(sol.objective);
                Ok(sol)
            }
            s => Err(Error::UnexpectedStatus(s)),
        }
    }

    fn record(&mut self, entities: &[usize], z_after: f64) {
        for &e in entities {
            self.ledger.push(e, self.iterations, z_after);
        }
        self.removal_sizes.push(entities.len());
    }

    fn finish(self, solution: LpSolution, final_objective: f64, shortcut_exit: bool) -> Outcome {
        Outcome {
            ledger: self.ledger,
            solution,
            final_objective,
            lp_count: self.lp_count,
            iterations: self.iterations,
            removal_sizes: self.removal_sizes,
            shortcut_exit,
            seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}

/// Options for the early exit of Extension 2.
#[derive(Clone, Copy, Debug)]
pub(crate) struct EarlyExit {
    pub threshold: usize,
    pub first_iteration_only: bool,
}

impl EarlyExit {
    fn applies(&self, iteration: usize, list: &CandidateList) -> bool {
        (!self.first_iteration_only || iteration == 1) && list.total() <= self.threshold
    }
}

/// Removes every candidate in `list.all` if that certifiably finishes the
/// run; otherwise removes them and lets the caller continue.
fn remove_all<P: RemovalProblem>(
    p: &mut P,
    t: &mut Tracker,
    sol: &LpSolution,
    list: &CandidateList,
) -> Option<f64> {
    let all: Vec<usize> = list.all.iter().map(|c| c.entity).collect();
    let certified = p.certify(sol, &all);
    for &e in &all {
        p.remove(e);
    }
    t.record(&all, certified.unwrap_or(f64::NAN));
    certified
}

fn check_empty<P: RemovalProblem>(p: &P, sol: &LpSolution) -> Result<()> {
    if p.empty_list_is_exit() {
        Ok(())
    } else {
        Err(Error::NoCandidates(sol.objective))
    }
}

/// The general algorithm: probe each candidate by removing it and
/// re-solving, permanently remove the one giving the lowest objective, and
/// take the next candidate list from the winner's probe.
pub(crate) fn run_probing<P: RemovalProblem>(
    p: &mut P,
    early: Option<EarlyExit>,
    cap: usize,
) -> Result<Outcome> {
    let mut t = Tracker::new();
    let mut sol = t.solve(p, None)?;
    if p.is_done(&sol) {
        let z = sol.objective;
        return Ok(t.finish(sol, z, false));
    }
    let mut list = p.candidates(&sol);

    loop {
        if list.is_empty() {
            check_empty(p, &sol)?;
            let z = sol.objective;
            return Ok(t.finish(sol, z, false));
        }
        if t.iterations >= cap {
            return Err(Error::IterationCap(cap));
        }
        t.iterations += 1;

        if let Some(e2) = early.filter(|e| e.applies(t.iterations, &list)) {
            debug!("early exit: {} candidates <= {}", list.total(), e2.threshold);
            if let Some(z) = remove_all(p, &mut t, &sol, &list) {
                return Ok(t.finish(sol, z, true));
            }
            sol = t.solve(p, Some(&sol.basis))?;
            if p.is_done(&sol) {
                let z = sol.objective;
                return Ok(t.finish(sol, z, false));
            }
            list = p.candidates(&sol);
            continue;
        }

        if list.total() == 1 {
            let only = list.all[0].entity;
            if let Some(z) = p.certify(&sol, &[only]) {
                p.remove(only);
                t.record(&[only], z);
                return Ok(t.finish(sol, z, true));
            }
        }

        let mut winner: Option<(usize, LpSolution, CandidateList)> = None;
        for cand in &list.ranked {
            let e = cand.entity;
            p.remove(e);
            let probe = t.solve(p, Some(&sol.basis))?;
            if p.is_done(&probe) {
                let z = probe.objective;
                t.record(&[e], z);
                return Ok(t.finish(probe, z, false));
            }
            if winner
                .as_ref()
                .is_none_or(|(_, best, _)| probe.objective < best.objective)
            {
                let next = p.candidates(&probe);
                winner = Some((e, probe, next));
            }
            p.reinstate(e);
        }

        let (e, probe, next) = winner.expect("candidate list is nonempty");
        debug!(
            "iteration {}: remove {e}, Z {} -> {}",
            t.iterations, sol.objective, probe.objective
        );
        p.remove(e);
        t.record(&[e], probe.objective);
        sol = probe;
        list = next;
    }
}

/// Extension 1: one loop that removes every candidate up to the first
/// change in mean of the sorted scores, without probing.
pub(crate) fn run_batched<P: RemovalProblem>(
    p: &mut P,
    detector: &ChangePointDetector,
    early: Option<EarlyExit>,
    singleton_shortcut: bool,
    cap: usize,
) -> Result<Outcome> {
    let mut t = Tracker::new();
    let mut warm: Option<Basis> = None;

    loop {
        let sol = t.solve(p, warm.as_ref())?;
        if p.is_done(&sol) {
            let z = sol.objective;
            return Ok(t.finish(sol, z, false));
        }
        let list = p.candidates(&sol);
        if list.is_empty() {
            check_empty(p, &sol)?;
            let z = sol.objective;
            return Ok(t.finish(sol, z, false));
        }
        if t.iterations >= cap {
            return Err(Error::IterationCap(cap));
        }
        t.iterations += 1;

        if let Some(e2) = early.filter(|e| e.applies(t.iterations, &list)) {
            debug!("early exit: {} candidates <= {}", list.total(), e2.threshold);
            if let Some(z) = remove_all(p, &mut t, &sol, &list) {
                return Ok(t.finish(sol, z, true));
            }
            warm = Some(sol.basis);
            continue;
        }

        if singleton_shortcut && list.total() == 1 {
            let only = list.all[0].entity;
            if let Some(z) = p.certify(&sol, &[only]) {
                p.remove(only);
                t.record(&[only], z);
                return Ok(t.finish(sol, z, true));
            }
        }

        let mut ranked = list.ranked.clone();
        super::candidates::sort_desc(&mut ranked);
        let scores: Vec<f64> = ranked.iter().map(|c| c.score).collect();
        let mut cut = detector.cut(&scores);
        if cut == scores.len() && cut > 1 {
            // Tied scores carry no ranking information, so fall back to
            // single removal as when no cut is accepted.
            cut = 1;
        }
        let chosen: Vec<usize> = ranked[..cut].iter().map(|c| c.entity).collect();
        debug!(
            "iteration {}: removing top {cut} of {} candidates",
            t.iterations,
            ranked.len()
        );
        for &e in &chosen {
            p.remove(e);
        }
        t.record(&chosen, f64::NAN);
        warm = Some(sol.basis);
    }
}
