//! Sequential vs rayon execution for the seed-grid root search and the lifetime ensemble.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use defectline::ensemble::{run_sweep, SweepConfig};
use defectline::linalg::{sample_ginibre, EvolutionLaw, C64};
use defectline::rootfind::{find_plane_zeros_with, RootOptions, SearchWindow};
use defectline::{Execution, WaveField};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn plane_zeros(c: &mut Criterion) {
    let n = 10;
    let sigma = 1.0 / (2.0 * n as f64).sqrt();
    let law = EvolutionLaw::new(sample_ginibre(n, sigma, 7).unwrap(), C64::new(1.0, 0.0));
    let f = WaveField::new(law, 5).unwrap();
    let w = SearchWindow::square(0.0, 0.0, 3.0 * sigma * (n as f64).sqrt() + 1.0, 32).unwrap();
    let mut g = c.benchmark_group("plane_zeros_n10");
    for (name, execution) in MODES {
        let opts = RootOptions {
            execution,
            ..RootOptions::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| find_plane_zeros_with(&f, 0.0, &w, &opts, &[]).unwrap())
        });
    }
    g.finish();
}

fn lifetime_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("lifetime_sweep");
    g.sample_size(10);
    for (name, execution) in MODES {
        let cfg = SweepConfig {
            sigmas: vec![2.0, 8.0],
            trials_per_sigma: 50,
            execution,
            ..SweepConfig::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_sweep(&cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, plane_zeros, lifetime_sweep);
criterion_main!(benches);
