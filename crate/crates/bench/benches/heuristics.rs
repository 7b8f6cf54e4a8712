use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use maxfs::classify::{classify, ClassifierAlgorithm};
use maxfs::sparse::{method_b, method_me1e2};
use maxfs::{solve_maxfs, Algorithm, ElasticMode, ElasticModel, SimplexSolver, StrategyConfig};
use maxfs_bench::{infeasible_system, overlapping_clouds, recovery_instance};

fn elastic_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("elastic_lp");
    for rows in [50, 200] {
        let model = ElasticModel::new(infeasible_system(rows, 10, 0.1, 1), ElasticMode::Standard).unwrap();
        let solver = SimplexSolver::default();
        group.bench_with_input(BenchmarkId::from_parameter(rows), &model, |b, m| {
            b.iter(|| black_box(m.solve(&solver).unwrap().objective))
        });
    }
    group.finish();
}

fn maxfs_strategies(c: &mut Criterion) {
    let sys = infeasible_system(60, 6, 0.1, 2);
    let mut group = c.benchmark_group("maxfs");
    group.sample_size(10);
    let configs = [
        StrategyConfig::new(Algorithm::Alg2, None),
        StrategyConfig::new(Algorithm::Alg2, Some(1)),
        StrategyConfig::new(Algorithm::Alg2, None).with_e1(),
        StrategyConfig::new(Algorithm::Alg3, Some(2)),
    ];
    for cfg in configs {
        group.bench_function(cfg.label(), |b| {
            b.iter(|| {
                let mut model = ElasticModel::new(sys.clone(), ElasticMode::Standard).unwrap();
                black_box(solve_maxfs(&mut model, &cfg).unwrap().lp_count)
            })
        });
    }
    group.finish();
}

fn classification(c: &mut Criterion) {
    let ds = overlapping_clouds(150, 3, 3);
    let mut group = c.benchmark_group("classify");
    group.sample_size(10);
    for alg in [ClassifierAlgorithm::Alg2E1, ClassifierAlgorithm::Alg2K1, ClassifierAlgorithm::Alg2Inf] {
        group.bench_function(alg.to_string(), |b| {
            b.iter(|| black_box(classify(&ds, 1.0, alg).unwrap().accuracy))
        });
    }
    group.finish();
}

fn sparse_recovery(c: &mut Criterion) {
    let p = recovery_instance(32, 64, 12, 4);
    let mut group = c.benchmark_group("sparse");
    group.sample_size(10);
    group.bench_function("me1e2", |b| b.iter(|| black_box(method_me1e2(&p, 29).unwrap().t)));
    group.bench_function("b(2)", |b| b.iter(|| black_box(method_b(&p, Some(2)).unwrap().t)));
    group.finish();
}

criterion_group!(benches, elastic_solve, maxfs_strategies, classification, sparse_recovery);
criterion_main!(benches);
