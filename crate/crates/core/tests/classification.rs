use maxfs::classify::{build_constraints, classify, classify_2e1, ClassifierAlgorithm, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ClassifierAlgorithm::*;

/// Two Gaussian clouds in the plane, `gap` apart along the first axis.
fn clouds(seed: u64, points: usize, gap: f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Vec::with_capacity(points * 2);
    let mut labels = Vec::with_capacity(points);
    for i in 0..points {
        let class = (i % 2) as u8;
        let shift = if class == 1 { gap } else { 0.0 };
        d.push(shift + rng.sample::<f64, _>(StandardNormal));
        d.push(rng.sample::<f64, _>(StandardNormal));
        labels.push(class);
    }
    Dataset::new(2, d, labels).unwrap()
}

fn separable(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Vec::new();
    let mut labels = Vec::new();
    while labels.len() < 60 {
        let p: [f64; 3] = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let s = p[0] + 2.0 * p[1] - p[2] - 0.5;
        if s.abs() < 0.3 {
            continue;
        }
        d.extend(p);
        labels.push(u8::from(s > 0.0));
    }
    Dataset::new(3, d, labels).unwrap()
}

#[test]
fn separable_data_is_classified_perfectly_in_one_lp() {
    for seed in 0..5 {
        let ds = separable(seed);
        for alg in [Alg2E1, Alg2Inf, Alg2K1] {
            let r = classify(&ds, 1.0, alg).unwrap();
            assert_eq!(r.accuracy, 1.0);
            assert_eq!(r.lp_count, 1);
        }
    }
}

#[test]
fn epsilon_scaling_keeps_the_classification() {
    for seed in 0..3 {
        let ds = separable(seed);
        let base = classify_2e1(&ds, 1.0).unwrap();
        for eps in [0.01, 0.5, 7.0] {
            let r = classify_2e1(&ds, eps).unwrap();
            for i in 0..ds.num_points() {
                assert_eq!(r.hyperplane.classify(ds.point(i)), base.hyperplane.classify(ds.point(i)));
            }
        }
    }
}

#[test]
fn xor_best_hyperplane_misses_one_point() {
    let ds = Dataset::new(2, vec![0., 0., 1., 1., 0., 1., 1., 0.], vec![0, 0, 1, 1]).unwrap();
    // every single removal leaves a separable system
    let sys = build_constraints(&ds, 1.0).unwrap();
    for drop in 0..4 {
        let keep: Vec<usize> = (0..4).filter(|&i| i != drop).collect();
        let z = maxfs::elastic::elastic_objective(&sys.subsystem(&keep), &Default::default()).unwrap();
        assert!(z <= 1e-6);
    }
    for alg in [Alg2E1, Alg2Inf, Alg2K1] {
        let r = classify(&ds, 1.0, alg).unwrap();
        assert_eq!(r.accuracy, 0.75, "{alg}");
        assert_eq!(r.removed_points.len(), 1);
    }
}

#[test]
fn overlapping_clouds_respect_invariants() {
    for seed in 0..4 {
        let ds = clouds(seed, 80, 2.0);
        let eps = 1.0;
        let mut lps = Vec::new();
        for alg in [Alg2E1, Alg2Inf, Alg2K1] {
            let r = classify(&ds, eps, alg).unwrap();
            let n = ds.num_points();
            assert!(r.accuracy + 1e-12 >= (n - r.removed_points.len()) as f64 / n as f64);
            for i in (0..n).filter(|i| !r.removed_points.contains(i)) {
                let m = r.hyperplane.margin(ds.point(i));
                let signed = if ds.labels()[i] == 1 { m } else { -m };
                assert!(signed >= eps - 1e-6, "point {i} margin {signed}");
            }
            assert_eq!(r.removal_sizes.iter().sum::<usize>(), r.removed_points.len());
            lps.push((r.lp_count, r.removed_points.len()));
        }
        let (e1, inf, k1) = (lps[0], lps[1], lps[2]);
        assert!(k1.0 <= inf.0);
        if inf.1 >= 2 {
            assert!(e1.0 < inf.0);
        }
    }
}

#[test]
fn loads_bundled_breast_cancer_data() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/breast_cancer_wisconsin.csv");
    let map = "benign=0,malignant=1".parse().unwrap();
    let ds = Dataset::from_csv_path(path, "class", &map, &[]).unwrap();
    assert_eq!(ds.num_points(), 683);
    assert_eq!(ds.num_features(), 9);
    assert_eq!(ds.labels().iter().filter(|&&l| l == 1).count(), 239);
}
