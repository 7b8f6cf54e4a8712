//! Fixtures shared by the benchmarks.

use maxfs::classify::Dataset;
use maxfs::harness::{gen_instance, SweepSpec};
use maxfs::{LinearSystem, RecoveryProblem, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Two overlapping Gaussian clouds in `dims` dimensions.
pub fn overlapping_clouds(points: usize, dims: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Vec::with_capacity(points * dims);
    let mut labels = Vec::with_capacity(points);
    for i in 0..points {
        let class = (i % 2) as u8;
        for k in 0..dims {
            let shift = if class == 1 && k == 0 { 2.5 } else { 0.0 };
            d.push(shift + rng.sample::<f64, _>(StandardNormal));
        }
        labels.push(class);
    }
    Dataset::new(dims, d, labels).expect("both classes present")
}

/// A random dense system with `rows` inequality rows over `vars` free
/// variables, made infeasible by flipping a fraction of the rows of a
/// feasible one.
pub fn infeasible_system(rows: usize, vars: usize, flipped: f64, seed: u64) -> LinearSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..vars).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut a = Vec::with_capacity(rows);
    let mut senses = Vec::with_capacity(rows);
    let mut rhs = Vec::with_capacity(rows);
    for _ in 0..rows {
        let row: Vec<f64> = (0..vars).map(|_| rng.random_range(-1.0..1.0)).collect();
        let act: f64 = row.iter().zip(&x).map(|(p, q)| p * q).sum();
        if rng.random_bool(flipped) {
            senses.push(Sense::Ge);
            rhs.push(act + 1.0);
        } else {
            senses.push(Sense::Le);
            rhs.push(act + 0.1);
        }
        a.push(row);
    }
    LinearSystem::new(vars, a, senses, rhs).expect("valid system")
}

/// A planted sparse-recovery instance.
pub fn recovery_instance(m: usize, n: usize, s: usize, seed: u64) -> RecoveryProblem {
    let spec = SweepSpec::new(m, n, vec![s], 1, seed);
    gen_instance(&spec, s, 0).expect("sparsity below m").0
}
