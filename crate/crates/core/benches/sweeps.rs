//! Sequential vs rayon dispatch of steady-state sweeps.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mpjc::exec::Execution;
use mpjc::protocols::{absorption_scan, coupling_sweep, weak_probe_strength};
use mpjc::{CutoffPolicy, ModelParams};

const STRATEGIES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn coupling(c: &mut Criterion) {
    let mut group = c.benchmark_group("coupling_sweep");
    group.sample_size(10);
    let params = ModelParams::new(2, 1, 0.0).with_rates(1.0, 0.5, 0.5);
    let g_grid: Vec<f64> = (0..16).map(|k| 10f64.powf(0.5 + k as f64 / 8.0)).collect();
    let policy = CutoffPolicy::starting_at(10);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::new(name, g_grid.len()), &g_grid, |b, grid| {
            b.iter(|| coupling_sweep(black_box(&params), grid, 2.0, &policy, exec).unwrap())
        });
    }
    group.finish();
}

fn absorption(c: &mut Criterion) {
    let mut group = c.benchmark_group("absorption_scan");
    group.sample_size(10);
    let g = 0.25;
    let params = ModelParams::new(3, 3, g).with_rates(1.0, 1e-4, 1e-4);
    let grid: Vec<f64> = (0..64).map(|k| -0.4 + 0.8 * k as f64 / 63.0).collect();
    let policy = CutoffPolicy::starting_at(9);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::new(name, grid.len()), &grid, |b, grid| {
            b.iter(|| {
                absorption_scan(
                    black_box(&params),
                    grid,
                    weak_probe_strength(g, 3),
                    &policy,
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, coupling, absorption);
criterion_main!(benches);
