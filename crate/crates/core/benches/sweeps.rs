use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use starheat::analysis::liyau_scan;
use starheat::oracles::{walk_simulate_with, WalkConfig};
use starheat::{Execution, GraphFunction, GraphPoint, Profile, QuadratureSpec, StarGraph};

fn modes() -> Vec<(&'static str, Execution)> {
    let mut m = vec![("sequential", Execution::Sequential)];
    if Execution::is_parallel_available() {
        m.push(("parallel", Execution::Parallel));
    }
    m
}

fn liyau(c: &mut Criterion) {
    let g = StarGraph::new(vec![0.2, 0.3, 0.5]).unwrap();
    let f = GraphFunction::empty()
        .with_atom(0, 1.0, 1.0)
        .unwrap()
        .with_density(1, Profile::Gauss { center: 2.0, sigma: 0.5, height: 1.0 })
        .unwrap()
        .with_density(2, Profile::Exp { rate: 1.0, height: 0.5 })
        .unwrap();
    let samples: Vec<_> =
        (0..300).map(|k| (GraphPoint { edge: k % 3, coord: 0.03 * k as f64 }, 0.1 + 0.03 * k as f64)).collect();
    let q = QuadratureSpec::default();
    let mut group = c.benchmark_group("liyau_scan_300");
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| liyau_scan(exec, &g, &f, &samples, &q).unwrap())
        });
    }
    group.finish();
}

fn walk(c: &mut Criterion) {
    let g = StarGraph::new(vec![0.2, 0.3, 0.5]).unwrap();
    let cfg = WalkConfig { step: 0.05, n_paths: 20_000, seed: 1 };
    let mut group = c.benchmark_group("walk_20k_paths");
    group.sample_size(20);
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| walk_simulate_with(exec, &g, &GraphPoint::vertex(), 1.0, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, liyau, walk);
criterion_main!(benches);
