//! The encoding chain: lattice → wrapped spherical code → tangent vectors at
//! the north pole → Stiefel points → space-frequency codewords.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::lattice::{scale_to_design_distance, LatticeError, LatticeFamily, LatticeSpec};
use crate::linalg::CMat;
use crate::manifold::{
    sphere_log_north, stiefel_basis, stiefel_exp, tangent_transfer, ManifoldError,
};
use crate::par::{self, Execution};
use crate::sfcode::{rate, Codebook, LatticeInfo, OfdmParams, SfError};
use crate::spherewrap::{
    build_code_with, BuildOptions, Provenance, SphericalCode, WrapError, WrapParams,
};

/// Band width as a multiple of the design distance when none is given.
pub const DEFAULT_BAND_RATIO: f64 = 1.5;

#[derive(Debug, thiserror::Error)]
pub enum DesignError {
    #[error(transparent)]
    Params(#[from] SfError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Wrap(#[from] WrapError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error("no design distance in [{lo}, {hi}] reaches rate {target} (best {best} after {evals} builds)")]
    RateNotReached {
        target: f64,
        best: f64,
        lo: f64,
        hi: f64,
        evals: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub nt: usize,
    pub family: LatticeFamily,
    #[serde(rename = "d_S")]
    pub d_s: f64,
    pub alpha: f64,
    pub band_width: f64,
}

impl DesignConfig {
    /// Band width `DEFAULT_BAND_RATIO · d_S`.
    pub fn new(k: usize, l: usize, nt: usize, family: LatticeFamily, d_s: f64, alpha: f64) -> Self {
        DesignConfig {
            k,
            l,
            nt,
            family,
            d_s,
            alpha,
            band_width: DEFAULT_BAND_RATIO * d_s,
        }
    }

    pub fn with_d_s(mut self, d_s: f64) -> Self {
        self.band_width *= d_s / self.d_s;
        self.d_s = d_s;
        self
    }

    pub fn params(&self) -> Result<OfdmParams, SfError> {
        OfdmParams::new(self.k, self.l, self.nt)
    }

    pub fn lattice_info(&self) -> LatticeInfo {
        LatticeInfo {
            family: self.family,
            d_s: self.d_s,
            alpha: self.alpha,
            band_width: self.band_width,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Design {
    pub config: DesignConfig,
    pub params: OfdmParams,
    /// Rotated lattice scaled to the design distance.
    pub spec: LatticeSpec,
    /// Spherical code; point `i` becomes codeword `i`.
    pub code: SphericalCode,
    pub basis: Vec<CMat>,
    pub codebook: Codebook,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSummary {
    pub config: DesignConfig,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "D")]
    pub dim: usize,
    pub words: usize,
    pub rate: f64,
    pub min_distance: f64,
    pub reclaimed: usize,
    pub buffer_candidates: usize,
}

/// Tangent vector used for the south pole, which has no logarithm at the
/// north pole: length π along `(X_0 + X_1)/√2` (or `X_0` when `D = 1`).
pub fn south_pole_tangent(dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    if dim == 1 {
        v[0] = PI;
    } else {
        v[0] = PI * FRAC_1_SQRT_2;
        v[1] = PI * FRAC_1_SQRT_2;
    }
    v
}

/// Tangent coordinates of each code point.
fn tangents(code: &SphericalCode, exec: Execution) -> Result<Vec<Vec<f64>>, ManifoldError> {
    let dim = code.params.dim;
    let idx: Vec<usize> = (0..code.len()).collect();
    par::map_collect(exec, &idx, |&i| match code.provenance[i] {
        Provenance::SouthPole => Ok(south_pole_tangent(dim)),
        _ => sphere_log_north(&code.points[i]),
    })
    .into_iter()
    .collect()
}

/// The scaled, rotated lattice and wrap parameters of a configuration.
pub fn lattice_and_wrap(
    config: &DesignConfig,
) -> Result<(OfdmParams, LatticeSpec, WrapParams), DesignError> {
    let params = config.params()?;
    let dim = params.sphere_dim();
    let spec = LatticeSpec::new(config.family, dim)?.with_rotation(config.alpha);
    let spec = scale_to_design_distance(&spec, config.d_s);
    let wrap = WrapParams::with_band_width(dim, config.d_s, config.band_width)?;
    Ok((params, spec, wrap))
}

pub fn design(config: &DesignConfig, exec: Execution) -> Result<Design, DesignError> {
    let (params, spec, wrap) = lattice_and_wrap(config)?;
    let opts = BuildOptions {
        exec,
        ..BuildOptions::default()
    };
    let code = build_code_with(&spec, &wrap, &opts)?;
    from_code(config, params, spec, code, exec)
}

fn from_code(
    config: &DesignConfig,
    params: OfdmParams,
    spec: LatticeSpec,
    code: SphericalCode,
    exec: Execution,
) -> Result<Design, DesignError> {
    let basis = stiefel_basis(params.nt, params.t)?;
    let vs = tangents(&code, exec)?;
    let inner = par::map_collect(exec, &vs, |v| {
        stiefel_exp(&tangent_transfer(v, &basis), params.nt)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let codebook = Codebook::assemble(params, inner, Some(config.lattice_info()))?;
    Ok(Design {
        config: *config,
        params,
        spec,
        code,
        basis,
        codebook,
    })
}

impl Design {
    pub fn summary(&self) -> DesignSummary {
        DesignSummary {
            config: self.config,
            t: self.params.t,
            dim: self.params.sphere_dim(),
            words: self.codebook.len(),
            rate: self.codebook.rate,
            min_distance: self.code.min_distance,
            reclaimed: self.code.reclaimed,
            buffer_candidates: self.code.buffer_candidates,
        }
    }

    /// Keeps the first `n` codewords.
    pub fn truncated(&self, n: usize) -> Design {
        let code = self.code.truncated(n);
        let n = code.len();
        let mut codebook = self.codebook.clone();
        codebook.inner.truncate(n);
        codebook.words.truncate(n);
        codebook.rate = rate(n, self.params.k);
        Design {
            config: self.config,
            params: self.params,
            spec: self.spec.clone(),
            code,
            basis: self.basis.clone(),
            codebook,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TuneStep {
    pub d_s: f64,
    pub words: usize,
    pub rate: f64,
}

/// Searches for a design distance giving a rate in `[target, target + window]`
/// with the band width ratio of `start` held fixed. Each step builds the
/// spherical code only; the chosen distance is then designed in full.
///
/// The rate falls roughly linearly in `ln d_S`; the search uses secant steps
/// on that relation inside a bracket, with a geometric midpoint when a secant
/// step leaves the bracket.
pub fn tune_rate(
    start: &DesignConfig,
    target: f64,
    window: f64,
    max_builds: usize,
    exec: Execution,
) -> Result<(Design, Vec<TuneStep>), DesignError> {
    let params = start.params()?;
    let k = params.k;
    let goal = target + 0.5 * window;
    let mut steps: Vec<TuneStep> = Vec::new();
    let mut codes: Vec<(DesignConfig, LatticeSpec, SphericalCode)> = Vec::new();
    // ln d with rate above the window, and with rate below it
    let mut hi_rate: Option<(f64, f64)> = None;
    let mut lo_rate: Option<(f64, f64)> = None;
    let mut d = start.d_s;
    for _ in 0..max_builds {
        let config = start.with_d_s(d);
        let (_, spec, wrap) = lattice_and_wrap(&config)?;
        let opts = BuildOptions {
            exec,
            ..BuildOptions::default()
        };
        let code = build_code_with(&spec, &wrap, &opts)?;
        let r = rate(code.len(), k);
        steps.push(TuneStep {
            d_s: d,
            words: code.len(),
            rate: r,
        });
        if r >= target && r <= target + window {
            let design = from_code(&config, params, spec, code, exec)?;
            return Ok((design, steps));
        }
        let x = d.ln();
        if r > target + window {
            if hi_rate.is_none_or(|(hx, _)| x > hx) {
                hi_rate = Some((x, r));
            }
        } else if lo_rate.is_none_or(|(lx, _)| x < lx) {
            lo_rate = Some((x, r));
        }
        codes.push((config, spec, code));
        let next = match (hi_rate, lo_rate) {
            (Some((x0, r0)), Some((x1, r1))) => {
                let secant = if r0 != r1 {
                    x0 + (goal - r0) * (x1 - x0) / (r1 - r0)
                } else {
                    0.5 * (x0 + x1)
                };
                let margin = 0.05 * (x1 - x0);
                if secant > x0 + margin && secant < x1 - margin {
                    secant
                } else {
                    0.5 * (x0 + x1)
                }
            }
            // one side only: extrapolate through the last two builds, or take
            // half the step of |C| ~ d^{-D}. The measured curve is steeper
            // than that model, and overshooting to a small d is expensive.
            _ => match steps.len().checked_sub(2).map(|i| steps[i]) {
                Some(prev) if prev.rate != r && prev.d_s != d => {
                    let xp = prev.d_s.ln();
                    x + (goal - r) * (x - xp) / (r - prev.rate)
                }
                _ => {
                    x + 0.5 * (r - goal) * k as f64 / params.sphere_dim() as f64
                        * std::f64::consts::LN_2
                }
            },
        };
        d = next.exp().min(PI);
    }
    let best = steps
        .iter()
        .filter(|s| s.rate >= target)
        .map(|s| s.rate)
        .fold(f64::NAN, f64::min);
    Err(DesignError::RateNotReached {
        target,
        best: if best.is_nan() {
            steps.iter().map(|s| s.rate).fold(0.0, f64::max)
        } else {
            best
        },
        lo: steps.iter().map(|s| s.d_s).fold(f64::INFINITY, f64::min),
        hi: steps.iter().map(|s| s.d_s).fold(0.0, f64::max),
        evals: steps.len(),
    })
}
