use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rabi_core::{run_sweep, Execution, GridAxis, Method, SolverConfig, SweepSpec};

fn spec() -> SweepSpec {
    SweepSpec {
        delta: GridAxis::new(0.1, 18.0, 12).unwrap(),
        g: GridAxis::new(1.0, 3.0, 12).unwrap(),
        method: Method::Spectral,
        solver: SolverConfig::default(),
    }
}

fn sweep(c: &mut Criterion) {
    let spec = spec();
    let mut group = c.benchmark_group("sweep_12x12");
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| run_sweep(black_box(&spec), Execution::Sequential).unwrap()));
    // falls back to sequential without the `parallel` feature
    group.bench_function("parallel", |b| {
        b.iter(|| run_sweep(black_box(&spec), Execution::Parallel { workers: 0 }).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
