use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use credit_cycles::engine::{run_monte_carlo_with, simulate_paths, sweep, Execution};
use credit_cycles::presets::preset_config;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_paths");
    for name in ["naked-cds-stress", "leverage-firesale"] {
        let cfg = preset_config(name).unwrap();
        for n in [1_000usize, 20_000] {
            group.throughput(Throughput::Elements(n as u64));
            for (label, exec) in MODES {
                group.bench_with_input(
                    BenchmarkId::new(format!("{name}/{label}"), n),
                    &n,
                    |b, &n| b.iter(|| simulate_paths(black_box(&cfg), n, 42, exec).unwrap()),
                );
            }
        }
    }
    group.finish();
}

fn summary(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_monte_carlo");
    let mut cfg = preset_config("cds-fair").unwrap();
    cfg.set("sigma", "0.2").unwrap();
    for (label, exec) in MODES {
        group.bench_function(label, |b| {
            b.iter(|| run_monte_carlo_with(black_box(&cfg), 10_000, 7, exec).unwrap())
        });
    }
    group.finish();
}

fn grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(20);
    let base = preset_config("overpricing-t1").unwrap();
    let values = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>();
    let grid = vec![
        ("theta".to_string(), values(&[0.05, 0.1, 0.2, 0.3])),
        ("psi_1".to_string(), values(&[-1.2, -0.9, -0.5, 0.0, 0.3])),
    ];
    for (label, exec) in MODES {
        group.bench_function(label, |b| {
            b.iter(|| sweep(black_box(&base), &grid, 500, 1, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, paths, summary, grid);
criterion_main!(benches);
