//! Frequency-domain Rayleigh MIMO-OFDM channel.
//!
//! Randomness comes from ChaCha8 keyed by a master seed. Trial `t` uses the
//! generator `ChaCha8Rng::seed_from_u64(seed)` switched to stream `t`, so
//! every trial has an independent, reproducible sequence whatever order the
//! trials run in. Complex Gaussians use the Box-Muller transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::CMat;
use crate::sfcode::OfdmParams;

/// Name of the random number pipeline, recorded next to simulation output.
pub const RNG_ALGORITHM: &str = "ChaCha8 (stream = trial index) + Box-Muller";

/// Generator for one trial: key from `seed`, stream `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Circularly symmetric complex Gaussian with `E|z|² = var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    // 1 − u lies in (0, 1], keeping the log finite
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let r = (-var * u1.ln()).sqrt();
    Complex64::from_polar(r, 2.0 * PI * u2)
}

#[derive(Clone, Debug)]
pub struct ChannelRealization {
    /// `L` tap matrices, `n_t×n_r`.
    pub taps: Vec<CMat>,
    /// `K` frequency responses `Ĥ_k = Σ_l H_l e^{−2πikl/K}`, `n_t×n_r`.
    pub freq: Vec<CMat>,
}

impl ChannelRealization {
    pub fn from_taps(k: usize, taps: Vec<CMat>) -> Self {
        let (nt, nr) = taps[0].shape();
        let freq = (0..k)
            .map(|kk| {
                let mut h = CMat::zeros(nt, nr);
                for (l, tap) in taps.iter().enumerate() {
                    let w =
                        Complex64::from_polar(1.0, -2.0 * PI * ((kk * l) % k) as f64 / k as f64);
                    h += tap.map(|z| z * w);
                }
                h
            })
            .collect();
        ChannelRealization { taps, freq }
    }

    pub fn nr(&self) -> usize {
        self.taps[0].ncols()
    }
}

/// Taps with i.i.d. `CN(0, 1/L)` entries.
pub fn sample_channel<R: Rng + ?Sized>(
    params: &OfdmParams,
    nr: usize,
    rng: &mut R,
) -> ChannelRealization {
    let var = 1.0 / params.l as f64;
    let taps = (0..params.l)
        .map(|_| CMat::from_fn(params.nt, nr, |_, _| complex_gaussian(rng, var)))
        .collect();
    ChannelRealization::from_taps(params.k, taps)
}

/// Amplitude `√(ρK/n_t)` applied to a codeword.
pub fn amplitude(rho: f64, k: usize, nt: usize) -> f64 {
    (rho * k as f64 / nt as f64).sqrt()
}

/// The noiseless part of the received block: row `k` is `√(ρK/n_t)·Φ_k·Ĥ_k`.
pub fn apply_channel(word: &CMat, ch: &ChannelRealization, rho: f64) -> CMat {
    let (k, nt) = word.shape();
    let a = amplitude(rho, k, nt);
    let nr = ch.nr();
    let mut out = CMat::zeros(k, nr);
    for kk in 0..k {
        let row = word.row(kk) * &ch.freq[kk];
        out.row_mut(kk).copy_from(&row.map(|z| z * a));
    }
    out
}

/// Received block `C̃` with i.i.d. `CN(0, 1)` noise (none when `noiseless`).
pub fn transmit<R: Rng + ?Sized>(
    word: &CMat,
    ch: &ChannelRealization,
    rho: f64,
    rng: &mut R,
    noiseless: bool,
) -> CMat {
    let mut out = apply_channel(word, ch, rho);
    if !noiseless {
        for z in out.iter_mut() {
            *z += complex_gaussian(rng, 1.0);
        }
    }
    out
}
