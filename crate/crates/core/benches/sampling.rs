use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tangent_qk::scenario::{builtin, evaluate_samples, sample_points, CheckId, Execution};

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate_samples");
    group.sample_size(10);
    for (name, checks) in [
        ("flat_c2_kahler", vec![CheckId::TmLcOracle, CheckId::DKraines, CheckId::QkDefect]),
        ("s2_round", vec![CheckId::TmLcOracle, CheckId::SurfaceTable, CheckId::EinsteinDefect]),
    ] {
        let spec = builtin(name).expect("built-in");
        let mfd = spec.manifold().expect("compiles");
        let samples = sample_points(&mfd, 32, spec.seed).expect("samples");
        let plan: Vec<(CheckId, bool)> = checks.into_iter().map(|id| (id, false)).collect();
        for (label, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(label, name), &execution, |b, e| {
                b.iter(|| evaluate_samples(&mfd, &spec, &samples, &plan, *e))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sampling);
criterion_main!(benches);
