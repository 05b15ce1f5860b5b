use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use swssb::diagnostics::bounds_fuzz;
use swssb::exec::Execution;
use swssb::rbim::{estimate_pc, PcParams};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn fuzz(c: &mut Criterion) {
    let mut group = c.benchmark_group("bounds_fuzz_200");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| bounds_fuzz(black_box(200), &[2, 3, 4], 1, exec).unwrap())
        });
    }
    group.finish();
}

fn disorder_samples(c: &mut Criterion) {
    let params = PcParams {
        sizes: vec![4, 8],
        p_grid: vec![0.05, 0.2],
        samples: 16,
        sweeps: 500,
        thermalization: 100,
        bootstrap: 20,
        periodic: true,
    };
    let mut group = c.benchmark_group("rbim_disorder_samples");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| estimate_pc(black_box(&params), 3, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, fuzz, disorder_samples);
criterion_main!(benches);
