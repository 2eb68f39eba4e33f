use std::hint::black_box;

use bsynth::bench::{run_bench, sweep_cases, BenchConfig};
use bsynth::netlist::ProgIface;
use bsynth::partition::{paredown, FitConfig, PareDownMode};
use bsynth::randgen::{generate_design, generate_stimulus, GenParams};
use bsynth::sim::run_simulation;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn two() -> ProgIface {
    ProgIface::new(2, 2).unwrap()
}

/// The same sweep run on one thread and on the rayon pool.
fn sweep_serial_vs_parallel(c: &mut Criterion) {
    let cases = sweep_cases(3..=8, 8, 0);
    let mut group = c.benchmark_group("sweep_3_to_8");
    group.sample_size(10);
    for (label, jobs) in [("serial", 1), ("parallel", 0)] {
        let mut cfg = BenchConfig::new(two());
        cfg.jobs = jobs;
        group.bench_function(label, |b| b.iter(|| run_bench(black_box(&cases), &cfg).unwrap()));
    }
    group.finish();
}

fn paredown_scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("paredown");
    group.sample_size(10);
    for n in [50usize, 150, 465] {
        let d = generate_design(&GenParams::new(n as u64, n)).unwrap();
        let cfg = FitConfig::new(two());
        group.bench_with_input(BenchmarkId::from_parameter(n), &d, |b, d| {
            b.iter(|| paredown(d, cfg, PareDownMode::Resilient).unwrap())
        });
    }
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let d = generate_design(&GenParams::new(5, 100)).unwrap();
    let s = generate_stimulus(&d, 5, 200, 500);
    c.bench_function("simulate_100_blocks_200_events", |b| {
        b.iter(|| run_simulation(black_box(&d), black_box(&s)).unwrap())
    });
}

criterion_group!(benches, sweep_serial_vs_parallel, paredown_scaling, simulation);
criterion_main!(benches);
