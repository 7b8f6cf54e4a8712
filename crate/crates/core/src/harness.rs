//! Seeded sparse-recovery instances and benchmark sweeps.
//!
//! Instance `(S, index)` of a sweep draws from a ChaCha8 generator seeded
//! with the sweep seed and switched to stream `S << 32 | index`, so every
//! instance is reproducible on its own and sweeps can run in any order.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{postprocess_result, Method, RecoveryProblem, RecoveryResult};

/// Version of the JSON-lines record schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Largest `‖y - x‖∞` for a recovery to count as exact.
pub const EXACT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub m: usize,
    pub n: usize,
    pub s_levels: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// List limit for B, C, M and the reference method.
    pub k: usize,
    /// ME1E2 threshold; `None` is `m - 3`.
    pub ell: Option<usize>,
    pub postprocess: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl SweepSpec {
    pub fn new(m: usize, n: usize, s_levels: Vec<usize>, instances: usize, seed: u64) -> Self {
        SweepSpec {
            m,
            n,
            s_levels,
            instances,
            seed,
            methods: vec![Method::C, Method::B, Method::M, Method::Me1e2],
            k: 2,
            ell: None,
            postprocess: false,
            threads: None,
        }
    }

    /// Compression ratio `(1 - m/n) · 100`.
    pub fn compression_ratio(&self) -> f64 {
        (1.0 - self.m as f64 / self.n as f64) * 100.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m >= self.n {
            return Err(Error::InvalidInput(format!(
                "need 0 < m < n, got m = {} and n = {}",
                self.m, self.n
            )));
        }
        if self.instances == 0 {
            return Err(Error::InvalidInput("need at least one instance".into()));
        }
        if let Some(&s) = self.s_levels.iter().find(|&&s| s >= self.m) {
            return Err(Error::InvalidInput(format!(
                "sparsity {s} must be below m = {}",
                self.m
            )));
        }
        if self.k == 0 || self.ell == Some(0) {
            return Err(Error::InvalidInput("k and ell must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidInput("no methods given".into()));
        }
        Ok(())
    }
}

/// A planted instance: `A` uniform in `[-10, 10]`, `x` with exactly `S`
/// standard normal entries at random positions, and `b = A x`.
pub fn gen_instance(spec: &SweepSpec, s: usize, index: usize) -> Result<(RecoveryProblem, Vec<f64>)> {
    if s >= spec.m {
        return Err(Error::InvalidInput(format!(
            "sparsity {s} must be below m = {}",
            spec.m
        )));
    }
    let (m, n) = (spec.m, spec.n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(((s as u64) << 32) | index as u64);
    let a: Vec<f64> = (0..m * n).map(|_| rng.random_range(-10.0..=10.0)).collect();
    let mut x = vec![0.0; n];
    for j in sample(&mut rng, n, s) {
        x[j] = loop {
            // a zero draw would silently lower the sparsity
            let v: f64 = rng.sample(StandardNormal);
            if v != 0.0 {
                break v;
            }
        };
    }
    let b = (0..m)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect();
    let p = RecoveryProblem::new(m, n, a, b)?;
    Ok((p, x))
}

/// Exact recovery: `T = S` and `‖y - x‖∞ <= EXACT_TOL`.
pub fn is_exact(r: &RecoveryResult, x: &[f64]) -> bool {
    let s = x.iter().filter(|v| **v != 0.0).count();
    r.t == s && r.y.iter().zip(x).all(|(a, b)| (a - b).abs() <= EXACT_TOL)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub version: u32,
    pub method: Method,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "S")]
    pub s: usize,
    pub instance: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub correct: bool,
    pub lp_count: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    #[serde(rename = "S")]
    pub s: usize,
    pub instances: usize,
    pub mean_t: f64,
    pub correct: usize,
    pub mean_lp_count: f64,
    pub mean_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    /// Per method, the largest sparsity level where every instance was
    /// recovered exactly.
    pub critical_sparsity: BTreeMap<String, Option<usize>>,
}

fn run_instance(spec: &SweepSpec, s: usize, index: usize) -> Result<Vec<BenchRecord>> {
    let (p, x) = gen_instance(spec, s, index)?;
    spec.methods
        .iter()
        .map(|&method| {
            let mut r = method.run(&p, Some(spec.k), spec.ell)?;
            if spec.postprocess {
                r = postprocess_result(&p, r)?;
            }
            Ok(BenchRecord {
                version: SCHEMA_VERSION,
                method,
                m: spec.m,
                n: spec.n,
                s,
                instance: index,
                t: r.t,
                correct: is_exact(&r, &x),
                lp_count: r.lp_count,
                seconds: r.seconds,
            })
        })
        .collect()
}

/// Runs every method on every instance. Records come back sorted by
/// `(S, instance, method order)` whatever the thread count.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<BenchRecord>> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = spec
        .s_levels
        .iter()
        .flat_map(|&s| (0..spec.instances).map(move |i| (s, i)))
        .collect();
    let work = || -> Result<Vec<BenchRecord>> {
        let parts: Result<Vec<Vec<BenchRecord>>> = jobs
            .par_iter()
            .map(|&(s, i)| run_instance(spec, s, i))
            .collect();
        Ok(parts?.into_iter().flatten().collect())
    };
    match spec.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

pub fn summarize(records: &[BenchRecord]) -> Summary {
    let mut groups: BTreeMap<(String, usize), Vec<&BenchRecord>> = BTreeMap::new();
    let mut order: Vec<Method> = Vec::new();
    for r in records {
        if !order.contains(&r.method) {
            order.push(r.method);
        }
        groups.entry((r.method.to_string(), r.s)).or_default().push(r);
    }
    let mut rows = Vec::new();
    let mut critical = BTreeMap::new();
    for method in order {
        let name = method.to_string();
        let mut best = None;
        for ((_, s), group) in groups.range((name.clone(), 0)..=(name.clone(), usize::MAX)) {
            let count = group.len() as f64;
            let correct = group.iter().filter(|r| r.correct).count();
            if correct == group.len() {
                best = Some(best.map_or(*s, |b: usize| b.max(*s)));
            }
            rows.push(SummaryRow {
                method,
                s: *s,
                instances: group.len(),
                mean_t: group.iter().map(|r| r.t as f64).sum::<f64>() / count,
                correct,
                mean_lp_count: group.iter().map(|r| r.lp_count as f64).sum::<f64>() / count,
                mean_seconds: group.iter().map(|r| r.seconds).sum::<f64>() / count,
            });
        }
        critical.insert(name, best);
    }
    Summary {
        rows,
        critical_sparsity: critical,
    }
}

/// One JSON object per line.
pub fn write_json_lines<W: Write, T: Serialize>(mut out: W, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_csv<W: Write, T: Serialize>(out: W, items: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for item in items {
        w.serialize(item)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible() {
        let spec = SweepSpec::new(4, 8, vec![1], 1, 7);
        let (p1, x1) = gen_instance(&spec, 1, 0).unwrap();
        let (p2, x2) = gen_instance(&spec, 1, 0).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(x1, x2);
        let (p3, _) = gen_instance(&spec, 1, 1).unwrap();
        assert_ne!(p1, p3);
    }

    #[test]
    fn zero_sparsity_gives_zero_rhs() {
        let spec = SweepSpec::new(4, 8, vec![0], 1, 1);
        let (p, x) = gen_instance(&spec, 0, 0).unwrap();
        assert!(x.iter().all(|v| *v == 0.0));
        assert!(p.b().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn planted_sparsity_is_exact() {
        let spec = SweepSpec::new(128, 256, vec![12], 100, 3);
        for i in 0..100 {
            let (p, x) = gen_instance(&spec, 12, i).unwrap();
            assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 12);
            assert!(p.residual(&x) < 1e-9);
            assert!((0..128).all(|r| (0..256).all(|c| p.a(r, c).abs() <= 10.0)));
        }
    }

    #[test]
    fn rejects_sparsity_at_m() {
        let spec = SweepSpec::new(4, 8, vec![4], 1, 1);
        assert!(gen_instance(&spec, 4, 0).is_err());
        assert!(spec.validate().is_err());
    }

    #[test]
    fn compression_ratio_of_half() {
        assert_eq!(SweepSpec::new(128, 256, vec![], 1, 0).compression_ratio(), 50.0);
    }

    #[test]
    fn summary_marks_critical_sparsity() {
        let rec = |s, instance, correct| BenchRecord {
            version: SCHEMA_VERSION,
            method: Method::B,
            m: 8,
            n: 16,
            s,
            instance,
            t: s,
            correct,
            lp_count: 1,
            seconds: 0.0,
        };
        let records = vec![rec(2, 0, true), rec(2, 1, true), rec(4, 0, true), rec(4, 1, false)];
        let summary = summarize(&records);
        assert_eq!(summary.critical_sparsity["b"], Some(2));
        assert_eq!(summary.rows.len(), 2);
        assert_eq!(summary.rows[1].correct, 1);
    }
}
