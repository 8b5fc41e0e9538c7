//! Monte Carlo symbol error rates.
//!
//! Trial `t` draws the transmitted index, the channel and the noise from
//! stream `t` of the master seed, so every SNR point sees the same channels
//! and noise shapes and only `ρ` changes between points. Error counts are
//! integers, so the totals do not depend on scheduling.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_channel, transmit, trial_rng};
use crate::decoder::{ml_decode, DecodeResult, LatticeDecoder, Method};
use crate::par::{self, Execution};
use crate::sfcode::Codebook;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecoderKind {
    Ml,
    Lattice,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Ml => "ml",
            DecoderKind::Lattice => "lattice",
        }
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ml" => Ok(DecoderKind::Ml),
            "lattice" => Ok(DecoderKind::Lattice),
            other => Err(format!(
                "unknown decoder {other:?} (expected ml or lattice)"
            )),
        }
    }
}

/// `ρ = 10^{dB/10}`.
pub fn snr_to_rho(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Parses `start:step:stop` (inclusive) or a single value.
pub fn parse_snr_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad SNR value {p:?}: {e}"))
        })
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [v] => Ok(vec![*v]),
        [start, step, stop] => {
            if step.is_nan() || *step <= 0.0 || stop < start {
                return Err(format!(
                    "SNR range {s:?} must have step > 0 and stop >= start"
                ));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(format!("SNR range {s:?} is not start:step:stop")),
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub nr: usize,
    pub decoder: DecoderKind,
    /// Skip the noise (sanity mode).
    pub noiseless: bool,
    pub exec: Execution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub snr_db: f64,
    pub trials: usize,
    pub symbol_errors: u64,
    pub ser: f64,
    pub decoder: String,
    pub code_id: String,
    pub seed: u64,
    /// Seconds spent on this point; not part of the CSV output.
    #[serde(skip)]
    pub wall_time: f64,
}

/// One trial: returns the transmitted index and the decoder output.
pub fn run_trial(
    cb: &Codebook,
    lattice: Option<&LatticeDecoder>,
    rho: f64,
    seed: u64,
    trial: u64,
    nr: usize,
    noiseless: bool,
) -> (usize, DecodeResult) {
    let mut rng = trial_rng(seed, trial);
    let sent = rng.random_range(0..cb.len());
    let ch = sample_channel(&cb.params, nr, &mut rng);
    let rx = transmit(&cb.words[sent], &ch, rho, &mut rng, noiseless);
    let out = match lattice {
        Some(dec) => dec.decode(&rx, &ch, cb, rho),
        None => ml_decode(&rx, &ch, cb, rho),
    };
    (sent, out)
}

/// SER per SNR point. `lattice` must be given for the lattice decoder.
pub fn simulate(
    cb: &Codebook,
    lattice: Option<&LatticeDecoder>,
    cfg: &SimConfig,
    code_id: &str,
) -> Vec<SimRow> {
    let dec = match cfg.decoder {
        DecoderKind::Ml => None,
        DecoderKind::Lattice => {
            Some(lattice.expect("lattice decoder requested without a lattice design"))
        }
    };
    cfg.snr_db
        .iter()
        .map(|&db| {
            let start = Instant::now();
            let rho = snr_to_rho(db);
            let errors = par::sum_range(cfg.exec, cfg.trials, |t| {
                let (sent, out) =
                    run_trial(cb, dec, rho, cfg.seed, t as u64, cfg.nr, cfg.noiseless);
                u64::from(out.index != sent)
            });
            SimRow {
                snr_db: db,
                trials: cfg.trials,
                symbol_errors: errors,
                ser: errors as f64 / cfg.trials as f64,
                decoder: cfg.decoder.name().to_string(),
                code_id: code_id.to_string(),
                seed: cfg.seed,
                wall_time: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Agreement {
    pub trials: usize,
    /// Trials where both decoders return the same index.
    pub agree: usize,
    pub ml_errors: usize,
    pub lattice_errors: usize,
    /// Trials the lattice decoder handed to full ML.
    pub fallbacks: usize,
}

impl Agreement {
    pub fn rate(&self) -> f64 {
        self.agree as f64 / self.trials as f64
    }
}

/// Runs both decoders on the same received blocks.
pub fn agreement(
    cb: &Codebook,
    lattice: &LatticeDecoder,
    snr_db: f64,
    trials: usize,
    seed: u64,
    nr: usize,
    exec: Execution,
) -> Agreement {
    let rho = snr_to_rho(snr_db);
    let per_trial = par::map_range(exec, trials, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let sent = rng.random_range(0..cb.len());
        let ch = sample_channel(&cb.params, nr, &mut rng);
        let rx = transmit(&cb.words[sent], &ch, rho, &mut rng, false);
        let ml = ml_decode(&rx, &ch, cb, rho);
        let lat = lattice.decode(&rx, &ch, cb, rho);
        (
            sent,
            ml.index,
            lat.index,
            lat.method == Method::LatticeFallbackMl,
        )
    });
    per_trial.into_iter().fold(
        Agreement {
            trials,
            ..Agreement::default()
        },
        |mut a, (sent, ml, lat, fb)| {
            a.agree += usize::from(ml == lat);
            a.ml_errors += usize::from(ml != sent);
            a.lattice_errors += usize::from(lat != sent);
            a.fallbacks += usize::from(fb);
            a
        },
    )
}
