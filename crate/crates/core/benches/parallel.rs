//! Sequential vs parallel execution of the data-parallel kernels.
//!
//! Run with `cargo bench -p pareidolia --bench parallel`. Outputs are
//! identical across modes; only wall time differs.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pareidolia::feature_model::FeatureModelParams;
use pareidolia::montecarlo::{
    default_bank, detection_curve_with, mc_feature_detect, mc_mode_density, DetectionCurveConfig,
    McConfig,
};
use pareidolia::stimuli::{gen_batch_with, NoiseSpec};
use pareidolia::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn noise_batch(c: &mut Criterion) {
    let mut g = c.benchmark_group("gen_batch_256x16");
    let spec = NoiseSpec::new(256, 8.0, 7).unwrap();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| gen_batch_with(black_box(&spec), 16, exec).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo_1e6");
    let params = FeatureModelParams::new(0.25, 4, 1.0).unwrap();
    for (name, exec) in MODES {
        let cfg = McConfig::new(1_000_000, 11).with_execution(exec);
        g.bench_function(BenchmarkId::new("feature", name), |b| {
            b.iter(|| mc_feature_detect(black_box(&params), &cfg).unwrap())
        });
        g.bench_function(BenchmarkId::new("mode_density", name), |b| {
            b.iter(|| mc_mode_density(black_box(1.5), 2.0, 1.0, &cfg).unwrap())
        });
    }
    g.finish();
}

fn detector_curve(c: &mut Criterion) {
    let mut g = c.benchmark_group("detection_curve");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    let bank = default_bank();
    let cfg = DetectionCurveConfig {
        per_width: 4,
        size: 128,
        ..Default::default()
    };
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| detection_curve_with(black_box(&cfg), &bank, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, noise_batch, monte_carlo, detector_curve);
criterion_main!(benches);
