//! Rayon against the sequential fallback on the three hot loops: code
//! construction, the pairwise diversity report and Monte Carlo trials.
//!
//! Set `RAYON_NUM_THREADS` to pin the pool size. With one core the two paths
//! should be within noise of each other.

use std::f64::consts::FRAC_PI_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sfc_core::design::{design, DesignConfig};
use sfc_core::diversity::{codebook_report, PairMode};
use sfc_core::lattice::{scale_to_design_distance, LatticeFamily, LatticeSpec};
use sfc_core::par::Execution;
use sfc_core::sfcode::{alamouti_codebook, Constellation};
use sfc_core::sim::{simulate, DecoderKind, SimConfig};
use sfc_core::spherewrap::{build_code_with, BuildOptions, WrapParams};

const MODES: [(&str, Execution); 2] = [
    ("parallel", Execution::Auto),
    ("sequential", Execution::Sequential),
];

fn code_build(c: &mut Criterion) {
    let d = 0.3;
    let spec = scale_to_design_distance(&LatticeSpec::new(LatticeFamily::Dn, 6).unwrap(), d);
    let params = WrapParams::with_band_width(6, d, 2.0 * d).unwrap();
    let mut group = c.benchmark_group("build_code_D6");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = BuildOptions {
            exec,
            ..BuildOptions::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| black_box(build_code_with(&spec, &params, opts).unwrap().len()))
        });
    }
    group.finish();
}

fn diversity_report(c: &mut Criterion) {
    let config = DesignConfig::new(8, 2, 2, LatticeFamily::K12, 0.22, FRAC_PI_2);
    let cb = design(&config, Execution::Auto)
        .unwrap()
        .truncated(256)
        .codebook;
    let mut group = c.benchmark_group("diversity_256_words");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(codebook_report(&cb, PairMode::All, exec).min_pf))
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let cb = alamouti_codebook(Constellation::Psk8, 2).unwrap();
    let mut group = c.benchmark_group("ml_sim_8psk_2000_trials");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SimConfig {
            snr_db: vec![10.0],
            trials: 2000,
            seed: 1,
            nr: 2,
            decoder: DecoderKind::Ml,
            noiseless: false,
            exec,
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| black_box(simulate(&cb, None, cfg, "8psk")[0].symbol_errors))
        });
    }
    group.finish();
}

criterion_group!(benches, code_build, diversity_report, monte_carlo);
criterion_main!(benches);
