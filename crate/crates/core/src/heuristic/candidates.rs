use serde::{Deserialize, Serialize};

use crate::elastic::ElasticModel;
use crate::lp::{LpSolution, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateKind {
    /// Elastic value times absolute dual price of a violated constraint.
    ViolatedProduct,
    /// Absolute dual price.
    DualSensitivity,
    /// Magnitude of a variable in a sparse-recovery LP.
    VariableMagnitude,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Constraint index in the elastic model, or variable index in sparse
    /// recovery.
    pub entity: usize,
    pub score: f64,
    pub kind: CandidateKind,
}

/// A ranked candidate list. `total` is the size of the untruncated list the
/// ranked entries were drawn from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CandidateList {
    pub ranked: Vec<Candidate>,
    pub all: Vec<Candidate>,
}

impl CandidateList {
    /// Builds a single list: sorts by score descending (ties by entity) and
    /// keeps the top `limit`.
    pub fn single(mut all: Vec<Candidate>, limit: Option<usize>) -> Self {
        sort_desc(&mut all);
        let ranked = truncate(&all, limit);
        CandidateList { ranked, all }
    }

    pub fn total(&self) -> usize {
        self.all.len()
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn entities(&self) -> Vec<usize> {
        self.ranked.iter().map(|c| c.entity).collect()
    }
}

pub(crate) fn sort_desc(list: &mut [Candidate]) {
    list.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.entity.cmp(&b.entity)));
}

fn truncate(list: &[Candidate], limit: Option<usize>) -> Vec<Candidate> {
    match limit {
        Some(k) => list.iter().take(k).copied().collect(),
        None => list.to_vec(),
    }
}

/// Algorithm 1: active constraints with a nonzero dual price, ranked by
/// absolute dual price.
pub fn build_candidates_alg1(
    sol: &LpSolution,
    model: &ElasticModel,
    limit: Option<usize>,
    tol: &Tolerances,
) -> CandidateList {
    let all = model
        .active()
        .filter(|&c| sol.duals[c].abs() > tol.optimality)
        .map(|c| Candidate {
            entity: c,
            score: sol.duals[c].abs(),
            kind: CandidateKind::DualSensitivity,
        })
        .collect();
    CandidateList::single(all, limit)
}

fn violated(
    sol: &LpSolution,
    model: &ElasticModel,
    tol: &Tolerances,
) -> (Vec<Candidate>, Vec<Candidate>) {
    let mut violated = Vec::new();
    let mut satisfied = Vec::new();
    for c in model.active() {
        let e = model.elastic_value(sol, c);
        let dual = sol.duals[c].abs();
        if e > tol.feasibility {
            violated.push(Candidate {
                entity: c,
                score: e * dual,
                kind: CandidateKind::ViolatedProduct,
            });
        } else if dual > tol.optimality {
            satisfied.push(Candidate {
                entity: c,
                score: dual,
                kind: CandidateKind::DualSensitivity,
            });
        }
    }
    (violated, satisfied)
}

/// Algorithm 2: violated constraints ranked by elastic value times absolute
/// dual price. Equalities use the larger of their two elastic variables.
pub fn build_candidates_alg2(
    sol: &LpSolution,
    model: &ElasticModel,
    limit: Option<usize>,
    tol: &Tolerances,
) -> CandidateList {
    let (violated, _) = violated(sol, model, tol);
    CandidateList::single(violated, limit)
}

/// Algorithm 3: the top `limit` violated constraints by product score
/// followed by the top `limit` satisfied constraints by absolute dual price.
pub fn build_candidates_alg3(
    sol: &LpSolution,
    model: &ElasticModel,
    limit: Option<usize>,
    tol: &Tolerances,
) -> CandidateList {
    let (mut violated, mut satisfied) = violated(sol, model, tol);
    sort_desc(&mut violated);
    sort_desc(&mut satisfied);
    let mut ranked = truncate(&violated, limit);
    ranked.extend(truncate(&satisfied, limit));
    violated.extend(satisfied);
    CandidateList {
        ranked,
        all: violated,
    }
}
