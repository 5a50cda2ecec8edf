use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mixfrac::solver::{simulate, MixedSdeProblem, Scheme};
use mixfrac::Execution;

fn monte_carlo(c: &mut Criterion) {
    let problem = MixedSdeProblem::sign_drift();
    let grid = problem.grid(1024).unwrap();
    let mut group = c.benchmark_group("sign_drift_1024_steps_256_paths");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        for scheme in [Scheme::Direct, Scheme::Transformed] {
            group.bench_with_input(BenchmarkId::new(name, format!("{scheme:?}")), &scheme, |b, &scheme| {
                b.iter(|| simulate(&problem, scheme, grid.clone(), 256, 1, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, monte_carlo);
criterion_main!(benches);
