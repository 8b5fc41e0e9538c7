//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Tolerances are pinned below.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfc_cli::{plot, results};
use sfc_core::decoder::LatticeDecoder;
use sfc_core::design::{design, tune_rate, Design, DesignConfig};
use sfc_core::diversity::{codebook_report, PairMode};
use sfc_core::lattice::{scale_to_design_distance, LatticeFamily, LatticeSpec};
use sfc_core::linalg::{frobenius, orthonormality_defect, real_inner, CMat};
use sfc_core::manifold::{
    sphere_exp_north, sphere_log_north, stiefel_basis, stiefel_exp, stiefel_log, tangent_transfer,
};
use sfc_core::par::Execution;
use sfc_core::sfcode::{alamouti_codebook, extended_a, Codebook, Constellation};
use sfc_core::sim::{agreement, simulate, DecoderKind, SimConfig, SimRow};
use sfc_core::spherewrap::{build_code, geodesic, WrapParams};

const UNITARY_TOL: f64 = 1e-10;
const STIEFEL_TOL: f64 = 1e-9;
const ORTH_TOL: f64 = 1e-9;
const DISTANCE_SLACK: f64 = 1e-9;
const ROUND_TRIP_TOL: f64 = 1e-8;
const GRAM_TOL: f64 = 1e-12;
const RATE_WINDOW: f64 = 0.05;
const PF_FLOOR: f64 = 1e-8;
const FISCHER_TOL: f64 = 1e-8;
const AGREEMENT_MIN: f64 = 0.95;
const TRIALS: usize = 10_000;
const SEED: u64 = 2024;

/// The medium-rate design: K12, K = 8, L = 2, n_t = 2, rotated.
fn medium(alpha: f64) -> DesignConfig {
    DesignConfig::new(8, 2, 2, LatticeFamily::K12, 0.22, alpha)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_construction(full: &Design) -> Outcome {
    let d = full.truncated(512);
    let cb = &d.codebook;
    let p = cb.params;
    let ext = extended_a(&cb.a_prime, p.l);
    let unitary = frobenius(&(ext.adjoint() * &ext - CMat::identity(p.k, p.k)));
    let stiefel = cb
        .words
        .iter()
        .map(orthonormality_defect)
        .fold(0.0, f64::max);
    let report = codebook_report(cb, PairMode::All, Execution::Auto);
    let pass = (p.t, p.sphere_dim()) == (4, 12)
        && unitary <= UNITARY_TOL
        && stiefel <= STIEFEL_TOL
        && report.exhaustive
        && report.max_orth_residual <= ORTH_TOL;
    outcome(
        pass,
        format!(
            "T={} D={} words={} |A'^H A' - I|={unitary:.2e} stiefel={stiefel:.2e} orth={:.2e} over {} pairs",
            p.t,
            p.sphere_dim(),
            cb.len(),
            report.max_orth_residual,
            report.pairs
        ),
    )
}

fn brute_min_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..i {
            best = best.min(geodesic(&points[i], &points[j]));
        }
    }
    best
}

fn c2_distance(full: &Design) -> Outcome {
    let k12 = brute_min_distance(&full.code.points);
    let d = 0.2;
    let spec = scale_to_design_distance(&LatticeSpec::new(LatticeFamily::Zn, 2).unwrap(), d);
    let z2 = build_code(&spec, &WrapParams::new(2, d).unwrap()).unwrap();
    let z2_min = brute_min_distance(&z2.points);
    let sizes_ok = full.code.len() <= 10_000 && z2.len() <= 10_000;
    let pass = sizes_ok && k12 >= full.config.d_s - DISTANCE_SLACK && z2_min >= d - DISTANCE_SLACK;
    outcome(
        pass,
        format!(
            "K12 D=12: {} points, min {k12:.6} (d_S {}); Z2 D=2: {} points, min {z2_min:.6} (d_S {d})",
            full.code.len(),
            full.config.d_s,
            z2.len()
        ),
    )
}

fn random_ball(dim: usize, max_norm: f64, rng: &mut impl Rng) -> Vec<f64> {
    let dir: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = norm(&dir);
    let r = rng.random_range(0.0..max_norm);
    dir.iter().map(|v| v / n * r).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn c3_manifold() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sphere_err: f64 = 0.0;
    for _ in 0..1000 {
        let v = random_ball(12, PI - 0.1, &mut rng);
        let back = sphere_log_north(&sphere_exp_north(&v)).unwrap();
        sphere_err = sphere_err.max(
            back.iter()
                .zip(&v)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
    }
    // a sample near the rim may have a shorter preimage; it counts if the
    // log returns a valid preimage no longer than the input
    let basis = stiefel_basis(2, 4).unwrap();
    let (mut stiefel_err, mut shorter, mut bad): (f64, usize, usize) = (0.0, 0, 0);
    for _ in 0..1000 {
        let v = random_ball(12, PI - 0.1, &mut rng);
        let omega = tangent_transfer(&v, &basis);
        let phi = stiefel_exp(&omega, 2).unwrap();
        let back = stiefel_log(&phi).unwrap();
        let err = frobenius(&(&back - &omega));
        if err <= ROUND_TRIP_TOL {
            stiefel_err = stiefel_err.max(err);
        } else {
            shorter += 1;
            let again = stiefel_exp(&back, 2).unwrap();
            if frobenius(&(again - &phi)) > ROUND_TRIP_TOL
                || frobenius(&back) > norm(&v) + ROUND_TRIP_TOL
            {
                bad += 1;
            }
        }
    }
    let mut gram: f64 = 0.0;
    for (i, x) in basis.iter().enumerate() {
        for (j, y) in basis.iter().enumerate() {
            gram = gram.max((real_inner(x, y) - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let pass = sphere_err <= ROUND_TRIP_TOL
        && stiefel_err <= ROUND_TRIP_TOL
        && bad == 0
        && gram <= GRAM_TOL;
    outcome(
        pass,
        format!(
            "sphere max err {sphere_err:.2e}; Stiefel max err {stiefel_err:.2e} ({shorter} shorter preimages, {bad} invalid); basis Gram err {gram:.2e}"
        ),
    )
}

fn c4_rates() -> Outcome {
    let start = medium(FRAC_PI_2);
    let mut parts = Vec::new();
    let mut pass = true;
    for target in [1.3, 1.9] {
        let t0 = Instant::now();
        match tune_rate(&start, target, RATE_WINDOW, 12, Execution::Auto) {
            Ok((d, steps)) => {
                let r = d.codebook.rate;
                pass &= r >= target && r <= target + RATE_WINDOW;
                parts.push(format!(
                    "R>={target}: d_S {:.5}, {} words, R {r:.4} ({} builds, {:.1} s)",
                    d.config.d_s,
                    d.codebook.len(),
                    steps.len(),
                    t0.elapsed().as_secs_f64()
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("R>={target}: {e}"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn c5_diversity(rotated: &Design) -> Outcome {
    let r = codebook_report(&rotated.codebook, PairMode::All, Execution::Auto);
    let plain = design(&medium(0.0), Execution::Auto).unwrap();
    let u = codebook_report(&plain.codebook, PairMode::All, Execution::Auto);
    let pass =
        r.exhaustive && r.words <= 2048 && r.min_pf > PF_FLOOR && r.max_fischer_gap <= FISCHER_TOL;
    outcome(
        pass,
        format!(
            "rotated: {} words, {} pairs, min p_F {:.3e}, Fischer gap {:.2e}; unrotated: {} words, min p_F {:.3e}",
            r.words, r.pairs, r.min_pf, r.max_fischer_gap, u.words, u.min_pf
        ),
    )
}

fn sweep(
    cb: &Codebook,
    lattice: Option<&LatticeDecoder>,
    decoder: DecoderKind,
    snr_db: &[f64],
    trials: usize,
    nr: usize,
    id: &str,
) -> Vec<SimRow> {
    let cfg = SimConfig {
        snr_db: snr_db.to_vec(),
        trials,
        seed: SEED,
        nr,
        decoder,
        noiseless: false,
        exec: Execution::Auto,
    };
    simulate(cb, lattice, &cfg, id)
}

/// Each point may exceed the previous one by at most two standard errors of
/// the difference.
fn monotone_within_2_sigma(rows: &[SimRow]) -> bool {
    rows.windows(2).all(|w| {
        let var = |r: &SimRow| r.ser * (1.0 - r.ser) / r.trials as f64;
        w[1].ser <= w[0].ser + 2.0 * (var(&w[0]) + var(&w[1])).sqrt()
    })
}

fn sers(rows: &[SimRow]) -> String {
    rows.iter()
        .map(|r| format!("{:.4}", r.ser))
        .collect::<Vec<_>>()
        .join(" ")
}

fn c6_decoding(full: &Design) -> Outcome {
    let d = full.truncated(256);
    let cb = &d.codebook;
    let lat = LatticeDecoder::new(&d);
    let nr = 2;
    let noiseless = |dec: DecoderKind| {
        let cfg = SimConfig {
            snr_db: vec![20.0],
            trials: 4 * cb.len(),
            seed: SEED,
            nr,
            decoder: dec,
            noiseless: true,
            exec: Execution::Auto,
        };
        simulate(cb, Some(&lat), &cfg, "c6")[0].symbol_errors
    };
    let (ml0, lat0) = (noiseless(DecoderKind::Ml), noiseless(DecoderKind::Lattice));
    let agree = agreement(cb, &lat, 20.0, TRIALS, SEED, nr, Execution::Auto);
    let snr: Vec<f64> = (0..=5).map(|i| 4.0 * i as f64).collect();
    let ml = sweep(cb, None, DecoderKind::Ml, &snr, TRIALS, nr, "k12-256");
    let la = sweep(
        cb,
        Some(&lat),
        DecoderKind::Lattice,
        &snr,
        TRIALS,
        nr,
        "k12-256",
    );
    let pass = ml0 == 0
        && lat0 == 0
        && agree.rate() >= AGREEMENT_MIN
        && monotone_within_2_sigma(&ml)
        && monotone_within_2_sigma(&la);
    outcome(
        pass,
        format!(
            "noiseless errors ml {ml0} lattice {lat0} over {} trials; agreement at 20 dB {:.4} ({} fallbacks / {}); SER 0..20 dB ml [{}] lattice [{}]",
            4 * cb.len(),
            agree.rate(),
            agree.fallbacks,
            agree.trials,
            sers(&ml),
            sers(&la)
        ),
    )
}

/// First SNR at which the first curve is at or below the second.
fn crossover(a: &[SimRow], b: &[SimRow]) -> Option<f64> {
    a.iter()
        .zip(b)
        .find(|(x, y)| x.ser <= y.ser)
        .map(|(x, _)| x.snr_db)
}

fn strictly_decreasing_overall(rows: &[SimRow]) -> bool {
    rows.first()
        .zip(rows.last())
        .is_some_and(|(f, l)| l.ser < f.ser)
        && monotone_within_2_sigma(rows)
}

fn c7_baseline() -> Outcome {
    let t0 = Instant::now();
    let (k12, _) = match tune_rate(&medium(FRAC_PI_2), 1.6, RATE_WINDOW, 12, Execution::Auto) {
        Ok(x) => x,
        Err(e) => return outcome(false, format!("no K12 design at R >= 1.6: {e}")),
    };
    let psk = alamouti_codebook(Constellation::Psk8, 2).unwrap();
    let lat = LatticeDecoder::new(&k12);
    let nr = 2;
    let trials = 2000;
    let snr: Vec<f64> = (0..=5).map(|i| 4.0 * i as f64).collect();
    let a = sweep(
        &k12.codebook,
        Some(&lat),
        DecoderKind::Lattice,
        &snr,
        trials,
        nr,
        "k12",
    );
    let b = sweep(
        &psk,
        None,
        DecoderKind::Ml,
        &snr,
        trials,
        nr,
        "8psk-alamouti",
    );

    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let rows: Vec<SimRow> = a.iter().chain(&b).cloned().collect();
    std::fs::write(dir.join("baseline.csv"), results::rows_to_string(&rows)).unwrap();
    let (series, _) = plot::group_series(&rows);
    let svg = plot::render_svg(
        &series,
        "K12 (R >= 1.6) vs 8-PSK Alamouti (R = 1.5), nr = 2",
    );
    let svg_path = dir.join("baseline.svg");
    let plotted = svg.is_some_and(|s| std::fs::write(&svg_path, s).is_ok());

    let pass = k12.codebook.rate >= 1.6
        && strictly_decreasing_overall(&a)
        && strictly_decreasing_overall(&b)
        && plotted;
    let cross = match crossover(&a, &b) {
        Some(s) => format!("K12 at or below baseline from {s} dB"),
        None => "no crossover in 0..20 dB".into(),
    };
    outcome(
        pass,
        format!(
            "K12 {} words R {:.4} vs 8PSK R {:.2}; SER k12 [{}] 8psk [{}]; {cross}; plot {} ({:.1} s)",
            k12.codebook.len(),
            k12.codebook.rate,
            psk.rate,
            sers(&a),
            sers(&b),
            svg_path.display(),
            t0.elapsed().as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let full = design(&medium(FRAC_PI_2), Execution::Auto).expect("medium-rate design");
    let mut all = true;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        all &= o.pass;
        println!(
            "criterion {n} ({name}): {} [{:.1} s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64(),
            o.detail
        );
    };
    report(1, "construction", &mut || c1_construction(&full));
    report(2, "wrapped distance", &mut || c2_distance(&full));
    report(3, "manifold", &mut c3_manifold);
    report(4, "rates", &mut c4_rates);
    report(5, "diversity", &mut || c5_diversity(&full));
    report(6, "decoding", &mut || c6_decoding(&full));
    report(7, "baseline", &mut c7_baseline);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
