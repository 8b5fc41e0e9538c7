//! Design-criteria quantities for codeword pairs and whole codebooks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{frobenius, hermitian_det, singular_values, CMat};
use crate::par::{self, Execution};
use crate::sfcode::{operators, Codebook, OfdmParams};

/// Codebooks up to this size are checked over all pairs.
pub const EXHAUSTIVE_LIMIT: usize = 2048;
pub const FULL_DIVERSITY_THRESHOLD: f64 = 1e-8;

/// `Δ̃ = (Δ, μΔ, …, μ^{L−1}Δ)`.
pub fn multipath_extension(delta: &CMat, l: usize) -> CMat {
    extension_with(delta, l, &operators(delta.nrows()).mu)
}

fn extension_with(delta: &CMat, l: usize, mu: &CMat) -> CMat {
    let (k, nt) = delta.shape();
    let mut out = CMat::zeros(k, nt * l);
    let mut cur = delta.clone();
    for i in 0..l {
        out.columns_mut(i * nt, nt).copy_from(&cur);
        cur = mu * cur;
    }
    out
}

/// Elementary symmetric polynomials `e_0, …, e_n` of `values`.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &v) in values.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e
}

#[derive(Clone, Debug, Serialize)]
pub struct PairMetrics {
    pub d_t: f64,
    pub p_t: f64,
    pub d_f: f64,
    pub p_f: f64,
    /// `s_0, …, s_{n_t L}`.
    pub s: Vec<f64>,
    pub div_f: f64,
    pub ch_f: f64,
    pub orth_residual: f64,
}

/// Effective SNR `ϱ_F = ρK/(4 n_t L)` of the diversity polynomial.
pub fn effective_snr(params: &OfdmParams, rho: f64) -> f64 {
    rho * params.k as f64 / (4.0 * params.nt as f64 * params.l as f64)
}

/// `max_l ‖Δ†μ^lΔ‖_F` over `l = 1..L−1`.
pub fn orthogonality_residual(delta: &CMat, l: usize, mu: &CMat) -> f64 {
    let mut cur = delta.clone();
    let mut worst: f64 = 0.0;
    for _ in 1..l {
        cur = mu * cur;
        worst = worst.max(frobenius(&(delta.adjoint() * &cur)));
    }
    worst
}

pub fn pair_metrics(
    phi: &CMat,
    psi: &CMat,
    params: &OfdmParams,
    rho: f64,
    nr: usize,
) -> PairMetrics {
    assert_eq!(
        phi.shape(),
        psi.shape(),
        "codewords must have the same shape"
    );
    let l = params.l;
    let delta = phi - psi;
    let ext = multipath_extension(&delta, l);
    let d_t = frobenius(&delta);
    let p_t = hermitian_det(&(delta.adjoint() * &delta)).max(0.0).sqrt();
    let p_f = hermitian_det(&(ext.adjoint() * &ext)).max(0.0).sqrt();
    let sq: Vec<f64> = singular_values(&ext).iter().map(|s| s * s).collect();
    let s = elementary_symmetric(&sq);
    let varrho = effective_snr(params, rho);
    let div_f = s.iter().rev().fold(0.0, |acc, si| acc * varrho + si);
    PairMetrics {
        d_t,
        p_t,
        d_f: (l as f64).sqrt() * d_t,
        p_f,
        div_f,
        ch_f: div_f.powi(-(nr as i32)),
        s,
        orth_residual: orthogonality_residual(&delta, l, &operators(params.k).mu),
    }
}

/// `Π (1 + ϱ σ_i²)`, the product form of the diversity polynomial.
pub fn diversity_product(phi: &CMat, psi: &CMat, params: &OfdmParams, rho: f64) -> f64 {
    let ext = multipath_extension(&(phi - psi), params.l);
    let varrho = effective_snr(params, rho);
    singular_values(&ext)
        .iter()
        .map(|s| 1.0 + varrho * s * s)
        .product()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairMode {
    All,
    Sample { pairs: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct DiversityReport {
    pub words: usize,
    pub pairs: usize,
    pub exhaustive: bool,
    pub seed: Option<u64>,
    pub min_dt: f64,
    pub min_pt: f64,
    pub min_df: f64,
    pub min_pf: f64,
    pub max_orth_residual: f64,
    /// Largest relative gap `|p_F² − (p_T²)^L| / (p_T²)^L` over pairs with
    /// `p_T > 1e-6`.
    pub max_fischer_gap: f64,
    pub full_diversity: bool,
    /// Pair attaining `min_pf`.
    pub worst_pair: (usize, usize),
}

#[derive(Clone, Copy)]
struct Acc {
    min_dt: f64,
    min_pt: f64,
    min_pf: f64,
    worst: (usize, usize),
    max_orth: f64,
    max_gap: f64,
}

impl Acc {
    fn empty() -> Self {
        Acc {
            min_dt: f64::INFINITY,
            min_pt: f64::INFINITY,
            min_pf: f64::INFINITY,
            worst: (usize::MAX, usize::MAX),
            max_orth: 0.0,
            max_gap: 0.0,
        }
    }

    // min by value then by pair index, so the merge order does not matter
    fn merge(mut self, o: Acc) -> Acc {
        self.min_dt = self.min_dt.min(o.min_dt);
        self.min_pt = self.min_pt.min(o.min_pt);
        if o.min_pf < self.min_pf || (o.min_pf == self.min_pf && o.worst < self.worst) {
            self.min_pf = o.min_pf;
            self.worst = o.worst;
        }
        self.max_orth = self.max_orth.max(o.max_orth);
        self.max_gap = self.max_gap.max(o.max_gap);
        self
    }
}

fn pair_acc(cb: &Codebook, mu: &CMat, i: usize, j: usize) -> Acc {
    let l = cb.params.l;
    let delta = &cb.words[i] - &cb.words[j];
    let ext = extension_with(&delta, l, mu);
    let pt2 = hermitian_det(&(delta.adjoint() * &delta)).max(0.0);
    let pf2 = hermitian_det(&(ext.adjoint() * &ext)).max(0.0);
    let pt = pt2.sqrt();
    let fischer = pt2.powi(l as i32);
    let gap = if pt > 1e-6 {
        (pf2 - fischer).abs() / fischer
    } else {
        0.0
    };
    Acc {
        min_dt: frobenius(&delta),
        min_pt: pt,
        min_pf: pf2.sqrt(),
        worst: (i, j),
        max_orth: orthogonality_residual(&delta, l, mu),
        max_gap: gap,
    }
}

/// Minima of the pair metrics over all pairs, or over sampled pairs for
/// codebooks larger than [`EXHAUSTIVE_LIMIT`] (with `PairMode::All`, a
/// sample of 200 000 pairs with seed 0 is used above the limit).
pub fn codebook_report(cb: &Codebook, mode: PairMode, exec: Execution) -> DiversityReport {
    let n = cb.len();
    assert!(n >= 2, "a diversity report needs at least two words");
    let mu = operators(cb.params.k).mu;
    let mode = match mode {
        PairMode::All if n > EXHAUSTIVE_LIMIT => PairMode::Sample {
            pairs: 200_000,
            seed: 0,
        },
        m => m,
    };
    let (acc, pairs, seed) = match mode {
        PairMode::All => {
            let rows = par::map_range(exec, n - 1, |i| {
                (i + 1..n).fold(Acc::empty(), |a, j| a.merge(pair_acc(cb, &mu, i, j)))
            });
            (
                rows.into_iter().fold(Acc::empty(), Acc::merge),
                n * (n - 1) / 2,
                None,
            )
        }
        PairMode::Sample { pairs, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let list: Vec<(usize, usize)> = (0..pairs)
                .map(|_| {
                    let i = rng.random_range(0..n);
                    let j = (i + rng.random_range(1..n)) % n;
                    (i.min(j), i.max(j))
                })
                .collect();
            let accs = par::map_collect(exec, &list, |&(i, j)| pair_acc(cb, &mu, i, j));
            (
                accs.into_iter().fold(Acc::empty(), Acc::merge),
                pairs,
                Some(seed),
            )
        }
    };
    DiversityReport {
        words: n,
        pairs,
        exhaustive: seed.is_none(),
        seed,
        min_dt: acc.min_dt,
        min_pt: acc.min_pt,
        min_df: (cb.params.l as f64).sqrt() * acc.min_dt,
        min_pf: acc.min_pf,
        max_orth_residual: acc.max_orth,
        max_fischer_gap: acc.max_gap,
        full_diversity: acc.min_pf > FULL_DIVERSITY_THRESHOLD,
        worst_pair: acc.worst,
    }
}
