//! Space-frequency codebooks `C = FFT·(A′·C̃′)`.
//!
//! An inner codebook of `T×n_t` Stiefel points is spread over `K = T·L`
//! subcarriers by the multipath matrix `A′`, whose columns are every `L`-th
//! column of a unitary circulant built from a chirp. Shifting `A′` by
//! `τ, …, τ^{L−1}` gives the remaining columns of that circulant, which makes
//! every codeword difference orthogonal to its modulated copies.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lattice::LatticeFamily;
use crate::linalg::{c, CMat};

mod file;

pub use file::{FileError, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SfError {
    #[error("L = {l} does not divide K = {k}")]
    IndivisibleK { k: usize, l: usize },
    #[error("block length T = {t} is smaller than n_t = {nt}")]
    InvalidShape { nt: usize, t: usize },
    #[error("inner word {index} is {rows}×{cols}, expected {t}×{nt}")]
    InnerShape {
        index: usize,
        rows: usize,
        cols: usize,
        t: usize,
        nt: usize,
    },
}

/// OFDM layout: `K` subcarriers, `L` channel taps, `n_t` transmit antennas and
/// the inner block length `T = K/L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfdmParams {
    pub k: usize,
    pub l: usize,
    pub nt: usize,
    pub t: usize,
}

impl OfdmParams {
    pub fn new(k: usize, l: usize, nt: usize) -> Result<Self, SfError> {
        if k == 0 || l == 0 || !k.is_multiple_of(l) {
            return Err(SfError::IndivisibleK { k, l });
        }
        let t = k / l;
        if nt == 0 || t < nt {
            return Err(SfError::InvalidShape { nt, t });
        }
        Ok(OfdmParams { k, l, nt, t })
    }

    /// Real dimension `n_t(2T − n_t)` of the inner Stiefel manifold.
    pub fn sphere_dim(&self) -> usize {
        self.nt * (2 * self.t - self.nt)
    }
}

/// `λ_k = exp(2πi k²/K)`.
pub fn chirp(k: usize) -> Vec<Complex64> {
    assert!(k >= 1, "chirp needs K >= 1");
    (0..k)
        .map(|j| {
            // k² mod K keeps the phase argument small for large K
            let e = ((j * j) % k) as f64;
            Complex64::from_polar(1.0, 2.0 * PI * e / k as f64)
        })
        .collect()
}

/// Unitary DFT and its inverse, the modulation `μ = diag(ω^k)` and the cyclic
/// down-shift `τ`, with `ω = e^{−2πi/K}`.
#[derive(Clone, Debug)]
pub struct Operators {
    pub fft: CMat,
    pub ifft: CMat,
    pub mu: CMat,
    pub tau: CMat,
}

fn omega_pow(k: usize, e: usize) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * (e % k) as f64 / k as f64)
}

pub fn operators(k: usize) -> Operators {
    assert!(k >= 1, "operators need K >= 1");
    let s = 1.0 / (k as f64).sqrt();
    let fft = CMat::from_fn(k, k, |r, col| omega_pow(k, r * col) * s);
    let ifft = fft.adjoint();
    let mu = CMat::from_fn(k, k, |r, col| {
        if r == col {
            omega_pow(k, r)
        } else {
            c(0.0, 0.0)
        }
    });
    let tau = CMat::from_fn(k, k, |r, col| {
        if r == (col + 1) % k {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    Operators { fft, ifft, mu, tau }
}

/// The circulant `U(c) = (c, τc, …, τ^{K−1}c)` with `c = FFT†(λ/√K)`.
pub fn chirp_circulant(k: usize) -> CMat {
    let ops = operators(k);
    let lambda = nalgebra::DVector::from_vec(chirp(k)).map(|z| z / (k as f64).sqrt());
    let col = &ops.ifft * lambda;
    CMat::from_fn(k, k, |r, j| col[(r + k - j) % k])
}

/// `A′ = (u_0, u_L, …, u_{(T−1)L})`, columns of the chirp circulant.
pub fn build_a(k: usize, l: usize) -> Result<CMat, SfError> {
    let p = OfdmParams::new(k, l, 1)?;
    let u = chirp_circulant(k);
    Ok(CMat::from_fn(k, p.t, |r, j| u[(r, j * l)]))
}

/// `Ã′ = (A′, τA′, …, τ^{L−1}A′)`.
pub fn extended_a(a: &CMat, l: usize) -> CMat {
    let k = a.nrows();
    let tau = operators(k).tau;
    let mut out = CMat::zeros(k, a.ncols() * l);
    let mut shifted = a.clone();
    for i in 0..l {
        out.columns_mut(i * a.ncols(), a.ncols())
            .copy_from(&shifted);
        shifted = &tau * shifted;
    }
    out
}

/// Lattice parameters a codebook was designed from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeInfo {
    pub family: LatticeFamily,
    pub d_s: f64,
    pub alpha: f64,
    pub band_width: f64,
}

/// An assembled space-frequency codebook.
#[derive(Clone, Debug)]
pub struct Codebook {
    pub params: OfdmParams,
    pub a_prime: CMat,
    /// Inner `T×n_t` Stiefel points.
    pub inner: Vec<CMat>,
    /// Assembled `K×n_t` words `FFT·A′·Φ`.
    pub words: Vec<CMat>,
    pub rate: f64,
    pub lattice: Option<LatticeInfo>,
}

impl Codebook {
    /// Builds the words `FFT·A′·Φ` for every inner point.
    pub fn assemble(
        params: OfdmParams,
        inner: Vec<CMat>,
        lattice: Option<LatticeInfo>,
    ) -> Result<Self, SfError> {
        for (index, phi) in inner.iter().enumerate() {
            if phi.shape() != (params.t, params.nt) {
                return Err(SfError::InnerShape {
                    index,
                    rows: phi.nrows(),
                    cols: phi.ncols(),
                    t: params.t,
                    nt: params.nt,
                });
            }
        }
        let a_prime = build_a(params.k, params.l)?;
        let spread = operators(params.k).fft * &a_prime;
        let words = inner.iter().map(|phi| &spread * phi).collect();
        let rate = rate(inner.len(), params.k);
        Ok(Codebook {
            params,
            a_prime,
            inner,
            words,
            rate,
            lattice,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Inner rate `R̃ = log2|C|/T`.
    pub fn inner_rate(&self) -> f64 {
        rate(self.inner.len(), self.params.t)
    }
}

/// `log2(size)/len`; an empty or single-word code has rate 0.
pub fn rate(size: usize, len: usize) -> f64 {
    if size <= 1 {
        0.0
    } else {
        (size as f64).log2() / len as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constellation {
    Qpsk,
    Psk8,
}

impl Constellation {
    pub fn order(self) -> usize {
        match self {
            Constellation::Qpsk => 4,
            Constellation::Psk8 => 8,
        }
    }

    pub fn points(self) -> Vec<Complex64> {
        let m = self.order();
        (0..m)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64))
            .collect()
    }
}

/// Alamouti words `(1/√2)[[s1, s2], [−s̄2, s̄1]]` over all symbol pairs, `s1`
/// varying slowest.
pub fn alamouti_inner(constellation: Constellation) -> Vec<CMat> {
    let pts = constellation.points();
    let mut out = Vec::with_capacity(pts.len() * pts.len());
    for &s1 in &pts {
        for &s2 in &pts {
            let w = CMat::from_row_slice(2, 2, &[s1, s2, -s2.conj(), s1.conj()]);
            out.push(w.map(|z| z * FRAC_1_SQRT_2));
        }
    }
    out
}

/// Alamouti inner code spread over `K = 2L` subcarriers.
pub fn alamouti_codebook(constellation: Constellation, l: usize) -> Result<Codebook, SfError> {
    let params = OfdmParams::new(2 * l, l, 2)?;
    Codebook::assemble(params, alamouti_inner(constellation), None)
}
