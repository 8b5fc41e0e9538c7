//! Maximum-likelihood decoding and the lattice decoding chain.
//!
//! The lattice decoder runs the encoder backwards: zero-forcing per
//! subcarrier, `A′†·FFT†`, projection onto the Stiefel manifold, Stiefel
//! logarithm, tangent coordinates, sphere exponential, unwrapping and a
//! closest-point search in the lattice. The resulting codeword and its
//! neighbours in the lattice domain are compared by the exact ML metric. Any
//! stage that fails hands the block to full ML decoding.

use kdtree::distance::squared_euclidean;
use kdtree::KdTree;
use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{amplitude, ChannelRealization};
use crate::design::Design;
use crate::lattice::{closest_point, LatticeSpec};
use crate::linalg::{polar_orthonormal, CMat};
use crate::manifold::{sphere_exp_north, stiefel_log, tangent_coords};
use crate::sfcode::{operators, Codebook};
use crate::spherewrap::{buffer_preimage, unwrap_point, Provenance, WrapError, WrapParams};

/// Cap on the neighbour list checked after the lattice stage.
pub const MAX_NEIGHBOURS: usize = 32;
/// Largest condition number of `Ĥ_k Ĥ_k†` accepted by the ZF front end.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "ML")]
    Ml,
    #[serde(rename = "lattice")]
    Lattice,
    #[serde(rename = "lattice-fallback-ML")]
    LatticeFallbackMl,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub stiefel_log_converged: bool,
    pub in_buffer: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecodeResult {
    pub index: usize,
    pub method: Method,
    pub metric: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error("subcarrier {0} is singular or too ill-conditioned for zero forcing")]
    SingularSubcarrier(usize),
}

/// `‖C̃ − √(ρK/n_t)·(Φ_k Ĥ_k)_k‖_F²`.
pub fn ml_metric(rx: &CMat, ch: &ChannelRealization, word: &CMat, rho: f64) -> f64 {
    let (k, nt) = word.shape();
    let a = amplitude(rho, k, nt);
    let nr = rx.ncols();
    let mut total = 0.0;
    for kk in 0..k {
        let h = &ch.freq[kk];
        for r in 0..nr {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..nt {
                s += word[(kk, j)] * h[(j, r)];
            }
            total += (rx[(kk, r)] - s * a).norm_sqr();
        }
    }
    total
}

/// Exhaustive ML; ties go to the lowest index.
pub fn ml_decode(rx: &CMat, ch: &ChannelRealization, cb: &Codebook, rho: f64) -> DecodeResult {
    let (index, metric) = best_of(rx, ch, cb, rho, 0..cb.len());
    DecodeResult {
        index,
        method: Method::Ml,
        metric,
        diagnostics: Diagnostics::default(),
    }
}

fn best_of(
    rx: &CMat,
    ch: &ChannelRealization,
    cb: &Codebook,
    rho: f64,
    candidates: impl IntoIterator<Item = usize>,
) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for i in candidates {
        let m = ml_metric(rx, ch, &cb.words[i], rho);
        if m < best.1 || (m == best.1 && i < best.0) {
            best = (i, m);
        }
    }
    best
}

/// Row `k`: `c̃_k Ĥ_k†(Ĥ_k Ĥ_k†)^{-1} / √(ρK/n_t)`.
pub fn zf_front_end(
    rx: &CMat,
    ch: &ChannelRealization,
    rho: f64,
    nt: usize,
) -> Result<CMat, DecodeError> {
    let k = rx.nrows();
    let a = amplitude(rho, k, nt);
    let mut out = CMat::zeros(k, nt);
    for (kk, h) in ch.freq.iter().enumerate() {
        let gram = h * h.adjoint();
        let eig = gram.clone().symmetric_eigen().eigenvalues;
        let (lo, hi) = eig
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, u), &e| (l.min(e), u.max(e)));
        if !(lo > 0.0 && hi / lo <= MAX_CONDITION) {
            return Err(DecodeError::SingularSubcarrier(kk));
        }
        let inv = gram
            .try_inverse()
            .ok_or(DecodeError::SingularSubcarrier(kk))?;
        let row = rx.row(kk) * h.adjoint() * inv;
        out.row_mut(kk).copy_from(&row.map(|z| z / a));
    }
    Ok(out)
}

/// Precomputed state for lattice decoding of one design.
#[derive(Clone, Debug)]
pub struct LatticeDecoder {
    spec: LatticeSpec,
    wrap: WrapParams,
    basis: Vec<CMat>,
    nt: usize,
    /// `A′†·FFT†`.
    back: CMat,
    /// Codeword of each lattice coefficient vector.
    lookup: std::collections::HashMap<Vec<i64>, usize>,
    neighbours: Vec<Vec<usize>>,
    south: Option<usize>,
    /// Hand failures to full ML decoding.
    pub fallback: bool,
}

impl LatticeDecoder {
    pub fn new(design: &Design) -> Self {
        let code = &design.code;
        let n = code.len();
        let dim = code.params.dim;
        // lattice-domain location of each code point; both poles sit at the
        // origin
        let location = |i: usize| -> Vec<f64> {
            match &code.provenance[i] {
                Provenance::NorthPole | Provenance::SouthPole => vec![0.0; dim],
                p => p
                    .lattice_point()
                    .expect("band or reclaimed point")
                    .embedding
                    .clone(),
            }
        };
        let locs: Vec<Vec<f64>> = (0..n).map(location).collect();
        let mut tree = KdTree::new(dim);
        for (i, p) in locs.iter().enumerate() {
            tree.add(p.as_slice(), i).expect("finite location");
        }
        let radius = 2.0 * code.d_s();
        let neighbours = locs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut near: Vec<(f64, usize)> = tree
                    .within(p, radius * radius, &squared_euclidean)
                    .expect("finite location")
                    .into_iter()
                    .filter(|(_, &j)| j != i)
                    .map(|(d2, &j)| (d2, j))
                    .collect();
                near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                near.into_iter()
                    .take(MAX_NEIGHBOURS)
                    .map(|(_, j)| j)
                    .collect()
            })
            .collect();
        let lookup = (0..n)
            .filter_map(|i| match &code.provenance[i] {
                Provenance::NorthPole => Some((vec![0; dim], i)),
                p => p.lattice_point().map(|lp| (lp.coeffs.clone(), i)),
            })
            .collect();
        let cb = &design.codebook;
        LatticeDecoder {
            spec: design.spec.clone(),
            wrap: code.params,
            basis: design.basis.clone(),
            nt: cb.params.nt,
            back: cb.a_prime.adjoint() * operators(cb.params.k).ifft,
            lookup,
            neighbours,
            south: code.south_pole(),
            fallback: true,
        }
    }

    /// Neighbour list of codeword `i` (lattice-domain distance at most
    /// `2·d_S`, nearest first, at most [`MAX_NEIGHBOURS`]).
    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.neighbours[i]
    }

    /// Codeword indices the lattice stage lands on, before verification: the
    /// band preimage of the estimate and, when its top-level colatitude lies
    /// in a buffer, the preimage under the reclamation map.
    pub fn candidates(
        &self,
        rx: &CMat,
        ch: &ChannelRealization,
        rho: f64,
    ) -> (Vec<usize>, Diagnostics) {
        let mut diag = Diagnostics::default();
        let Ok(phi_hat) = zf_front_end(rx, ch, rho, self.nt) else {
            return (Vec::new(), diag);
        };
        let inner = polar_orthonormal(&(&self.back * phi_hat));
        let Ok(omega) = stiefel_log(&inner) else {
            return (Vec::new(), diag);
        };
        diag.stiefel_log_converged = true;
        let v = tangent_coords(&omega, &self.basis);
        let q = sphere_exp_north(&v);
        let mut found = Vec::new();
        match unwrap_point(&self.wrap, &q) {
            Ok(un) => {
                diag.in_buffer = un.in_buffer;
                found.extend(self.lookup_near(&un.x));
            }
            Err(WrapError::PoleAmbiguity) => found.extend(self.south),
            Err(_) => {}
        }
        if let Some(pre) = buffer_preimage(&self.wrap, &q) {
            found.extend(self.lookup_near(&pre.x).filter(|i| !found.contains(i)));
        }
        (found, diag)
    }

    fn lookup_near(&self, x: &[f64]) -> Option<usize> {
        self.lookup
            .get(&closest_point(&self.spec, x).coeffs)
            .copied()
    }

    pub fn decode(
        &self,
        rx: &CMat,
        ch: &ChannelRealization,
        cb: &Codebook,
        rho: f64,
    ) -> DecodeResult {
        let (cands, diagnostics) = self.candidates(rx, ch, rho);
        match best_of(rx, ch, cb, rho, cands) {
            (i, _) if i != usize::MAX => {
                let list = std::iter::once(i).chain(self.neighbours[i].iter().copied());
                let (index, metric) = best_of(rx, ch, cb, rho, list);
                DecodeResult {
                    index,
                    method: Method::Lattice,
                    metric,
                    diagnostics,
                }
            }
            _ if self.fallback => DecodeResult {
                method: Method::LatticeFallbackMl,
                diagnostics,
                ..ml_decode(rx, ch, cb, rho)
            },
            // without fallback a failed block decodes to word 0
            _ => DecodeResult {
                index: 0,
                method: Method::Lattice,
                metric: ml_metric(rx, ch, &cb.words[0], rho),
                diagnostics,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, transmit, trial_rng};
    use crate::linalg::c;
    use crate::sfcode::{alamouti_codebook, Constellation};

    #[test]
    fn noiseless_ml_recovers_every_word() {
        let cb = alamouti_codebook(Constellation::Qpsk, 2).unwrap();
        let mut rng = trial_rng(1, 0);
        let ch = sample_channel(&cb.params, 2, &mut rng);
        for (j, w) in cb.words.iter().enumerate() {
            let rx = transmit(w, &ch, 10.0, &mut rng, true);
            let r = ml_decode(&rx, &ch, &cb, 10.0);
            assert_eq!(r.index, j);
            assert!(r.metric < 1e-20);
        }
    }

    #[test]
    fn ties_go_to_the_lowest_index() {
        let mut cb = alamouti_codebook(Constellation::Qpsk, 2).unwrap();
        cb.words = vec![cb.words[3].clone(), cb.words[3].clone()];
        let mut rng = trial_rng(2, 0);
        let ch = sample_channel(&cb.params, 1, &mut rng);
        let rx = transmit(&cb.words[1], &ch, 5.0, &mut rng, true);
        assert_eq!(ml_decode(&rx, &ch, &cb, 5.0).index, 0);
    }

    #[test]
    fn zero_forcing_inverts_a_unitary_channel() {
        let cb = alamouti_codebook(Constellation::Psk8, 2).unwrap();
        let u = CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)]);
        let ch = ChannelRealization::from_taps(4, vec![u, CMat::zeros(2, 2)]);
        let rx = transmit(&cb.words[5], &ch, 3.0, &mut trial_rng(0, 0), true);
        let est = zf_front_end(&rx, &ch, 3.0, 2).unwrap();
        assert!(crate::linalg::frobenius(&(est - &cb.words[5])) < 1e-12);
        // one receive antenna cannot separate two streams
        let thin = ChannelRealization::from_taps(4, vec![CMat::from_element(2, 1, c(1.0, 0.0)); 2]);
        assert!(zf_front_end(&CMat::zeros(4, 1), &thin, 1.0, 2).is_err());
    }
}
