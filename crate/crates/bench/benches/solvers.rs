use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use danm::anm::{danm_denoise, danm_exact, vanm_exact};
use danm::estimator::default_lambda;
use danm::model::add_noise;
use danm::{CompressionOperator, SolverKind, SolverOptions};
use danm_bench::noise_free_signal;

fn exact(c: &mut Criterion) {
    let opts = SolverOptions::default();
    let mut group = c.benchmark_group("exact");
    group.sample_size(10);
    for n in [8usize, 12, 16] {
        let x = noise_free_signal(n, 1);
        group.bench_with_input(BenchmarkId::new("danm", n), &x, |b, x| b.iter(|| danm_exact(x, &opts).unwrap()));
        if n <= 12 {
            group.bench_with_input(BenchmarkId::new("vanm", n), &x, |b, x| {
                b.iter(|| vanm_exact(x, &opts, 1024).unwrap())
            });
        }
    }
    group.finish();
}

fn denoise(c: &mut Criterion) {
    let n = 16;
    let (y, power) = add_noise(&noise_free_signal(n, 2), 20.0, 3).unwrap();
    let lambda = default_lambda(power.sqrt(), n, n);
    let op = CompressionOperator::identity(n, n);
    let mut group = c.benchmark_group("denoise_16");
    group.sample_size(10);
    for kind in [SolverKind::Ipm, SolverKind::Admm] {
        let opts = SolverOptions::default().with_kind(kind);
        group.bench_function(format!("{kind:?}").to_lowercase(), |b| {
            b.iter(|| danm_denoise(&y, &op, lambda, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, exact, denoise);
criterion_main!(benches);
