use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use btsched_bench::laplacian_prior;
use btsched_core::rbd::RbdConfig;
use btsched_core::scheduler::approx_schedule;
use btsched_core::exact_schedule;

fn bench_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_schedule");
    group.sample_size(10).measurement_time(Duration::from_secs(5));
    for n in [8usize, 16, 32] {
        let spec = laplacian_prior(n, 0.5, 42);
        group.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, spec| {
            b.iter(|| exact_schedule(black_box(spec)).unwrap())
        });
    }
    group.finish();
}

fn bench_rbd(c: &mut Criterion) {
    let mut group = c.benchmark_group("approx_schedule");
    group.sample_size(10).measurement_time(Duration::from_secs(5));
    for n in [8usize, 16, 32, 64, 128] {
        let spec = laplacian_prior(n, 0.5, 42);
        group.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, spec| {
            b.iter(|| approx_schedule(black_box(spec), &RbdConfig::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_exact, bench_rbd);
criterion_main!(benches);
