//! Wrapped spherical codes: a scaled lattice in R^D is laid onto S^D band by
//! band, with buffers between bands so the design distance survives.
//!
//! For `x = (y, z)` the last coordinate `z` is the colatitude measured from
//! the north pole (`z ≥ 0`) or the south pole (`z < 0`). Bands start at
//! `a_i = d + i·w` and end `d` below the next start, or at `π/2 − d/2`. Inside
//! band `i` the remaining coordinates are wrapped recursively onto the
//! equatorial sphere of one dimension less, with the sub-level design distance
//! `d_i = 2·asin(sin(d/2) / sin a_i)` (the angle whose chord on the parallel at
//! colatitude `a_i` equals the chord of `d`) and `y` shrunk by `ρ_i = d / d_i`.
//! Band widths scale with the design distance on every level. The base case is
//! the circle `t ∈ [−π, π − d]`.

mod code;
mod domain;

pub use code::{build_code, build_code_with, BuildOptions, Hemisphere, Provenance, SphericalCode};

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::lattice::LatticeError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WrapError {
    #[error("invalid wrap parameters: {0}")]
    InvalidParams(String),
    #[error("lattice dimension {lattice} does not match sphere dimension {sphere}")]
    DimensionMismatch { lattice: usize, sphere: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("no code points survived")]
    EmptyCode,
    #[error("code has minimal distance {found} below the design distance {required}")]
    DistanceViolation { found: f64, required: f64 },
    #[error("point is at the south pole; the preimage is not unique")]
    PoleAmbiguity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WrapParams {
    pub dim: usize,
    pub d_s: f64,
    pub band_width: f64,
}

/// One latitude band `[lo, hi]` of colatitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    /// Sub-level design distance and the factor `y` is divided by, or `None`
    /// when the band is too close to the pole to hold anything but `y = 0`.
    pub sub: Option<SubLevel>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubLevel {
    pub d: f64,
    pub rho: f64,
}

/// Result of wrapping one point.
#[derive(Clone, Debug, PartialEq)]
pub enum Wrapped {
    Point(Vec<f64>),
    InBuffer,
    OutOfDomain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Unwrapped {
    pub x: Vec<f64>,
    /// The colatitude on some level fell in a buffer and was moved to the
    /// nearest band edge.
    pub in_buffer: bool,
}

impl WrapParams {
    /// Band width defaults to `4·d_s`.
    pub fn new(dim: usize, d_s: f64) -> Result<Self, WrapError> {
        Self::with_band_width(dim, d_s, 4.0 * d_s)
    }

    pub fn with_band_width(dim: usize, d_s: f64, band_width: f64) -> Result<Self, WrapError> {
        if dim == 0 {
            return Err(WrapError::InvalidParams(
                "dimension must be at least 1".into(),
            ));
        }
        if !(d_s > 0.0 && d_s <= PI) {
            return Err(WrapError::InvalidParams(format!(
                "design distance {d_s} not in (0, π]"
            )));
        }
        if !(band_width > d_s && band_width.is_finite()) {
            return Err(WrapError::InvalidParams(format!(
                "band width {band_width} must exceed the design distance {d_s}"
            )));
        }
        Ok(WrapParams {
            dim,
            d_s,
            band_width,
        })
    }

    pub(crate) fn ratio(&self) -> f64 {
        self.band_width / self.d_s
    }

    /// Bands of the top level (same in both hemispheres).
    pub fn bands(&self) -> Vec<Band> {
        level_bands(self.d_s, self.ratio())
    }
}

/// Bands of a level with design distance `d` and band width `ratio·d`.
pub(crate) fn level_bands(d: f64, ratio: f64) -> Vec<Band> {
    let w = ratio * d;
    let top = FRAC_PI_2 - 0.5 * d;
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        let lo = d + i as f64 * w;
        if lo > top {
            break;
        }
        out.push(band_at(d, w, lo, top));
        i += 1;
    }
    out
}

fn band_at(d: f64, w: f64, lo: f64, top: f64) -> Band {
    let hi = (lo + w - d).min(top);
    let s = (0.5 * d).sin() / lo.sin();
    let sub = (s < 1.0).then(|| {
        let sub_d = 2.0 * s.asin();
        SubLevel {
            d: sub_d,
            rho: d / sub_d,
        }
    });
    Band { lo, hi, sub }
}

/// Band containing colatitude `theta`, if any.
fn find_band(d: f64, ratio: f64, theta: f64) -> Option<(usize, Band)> {
    let w = ratio * d;
    let top = FRAC_PI_2 - 0.5 * d;
    if theta < d || theta > top {
        return None;
    }
    let i = ((theta - d) / w).floor() as usize;
    // guard against rounding at band starts
    for j in [i, i.wrapping_sub(1), i + 1] {
        if j == usize::MAX {
            continue;
        }
        let lo = d + j as f64 * w;
        if lo > top {
            continue;
        }
        let b = band_at(d, w, lo, top);
        if theta >= b.lo && theta <= b.hi {
            return Some((j, b));
        }
    }
    None
}

/// Wraps `x ∈ R^D` to a unit vector in R^{D+1}.
pub fn wrap_point(params: &WrapParams, x: &[f64]) -> Wrapped {
    assert_eq!(x.len(), params.dim);
    wrap_level(params.d_s, params.ratio(), x)
}

fn wrap_level(d: f64, ratio: f64, x: &[f64]) -> Wrapped {
    let m = x.len();
    if m == 1 {
        let t = x[0];
        return if t >= -PI && t <= PI - d {
            Wrapped::Point(vec![t.cos(), t.sin()])
        } else if t > PI - d && t < PI {
            Wrapped::InBuffer
        } else {
            Wrapped::OutOfDomain
        };
    }
    if x.iter().all(|&v| v == 0.0) {
        let mut q = vec![0.0; m + 1];
        q[m] = 1.0;
        return Wrapped::Point(q);
    }
    let (y, z) = x.split_at(m - 1);
    let z = z[0];
    let theta = z.abs();
    if theta > FRAC_PI_2 {
        return Wrapped::OutOfDomain;
    }
    let Some((_, band)) = find_band(d, ratio, theta) else {
        return Wrapped::InBuffer;
    };
    let u = match band.sub {
        Some(sub) => {
            let scaled: Vec<f64> = y.iter().map(|v| v / sub.rho).collect();
            match wrap_level(sub.d, ratio, &scaled) {
                Wrapped::Point(u) => u,
                other => return other,
            }
        }
        None if y.iter().all(|&v| v == 0.0) => {
            let mut u = vec![0.0; m];
            u[m - 1] = 1.0;
            u
        }
        None => return Wrapped::OutOfDomain,
    };
    Wrapped::Point(lift(&u, theta, z < 0.0))
}

/// `(sin θ · u, ±cos θ)`.
fn lift(u: &[f64], theta: f64, south: bool) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    let mut q: Vec<f64> = u.iter().map(|v| v * s).collect();
    q.push(if south { -c } else { c });
    q
}

/// Hemisphere and band index of a point that [`wrap_point`] maps inside a
/// band (top level only).
pub(crate) fn top_band_of(params: &WrapParams, x: &[f64]) -> Option<(bool, usize)> {
    let z = x[params.dim - 1];
    if params.dim == 1 {
        return None;
    }
    find_band(params.d_s, params.ratio(), z.abs()).map(|(i, _)| (z < 0.0, i))
}

/// Image of a point whose top-level colatitude lies in a buffer (pole cap,
/// gap between bands, or next to the equator), using the longitude map of the
/// band just below the buffer (band 0 for the pole cap). Returns `None` if the
/// point is not in a top-level buffer or its longitude falls outside that
/// band's sub-domain.
pub fn buffer_image(params: &WrapParams, x: &[f64]) -> Option<Vec<f64>> {
    let m = params.dim;
    if m == 1 {
        return None;
    }
    let (y, z) = x.split_at(m - 1);
    let z = z[0];
    let theta = z.abs();
    if theta > FRAC_PI_2 || theta == 0.0 {
        return None;
    }
    let d = params.d_s;
    let ratio = params.ratio();
    if find_band(d, ratio, theta).is_some() {
        return None;
    }
    let bands = level_bands(d, ratio);
    let band = *bands
        .iter()
        .rev()
        .find(|b| b.hi < theta)
        .or(bands.first())?;
    let u = match band.sub {
        Some(sub) => {
            let scaled: Vec<f64> = y.iter().map(|v| v / sub.rho).collect();
            match wrap_level(sub.d, ratio, &scaled) {
                Wrapped::Point(u) => u,
                _ => return None,
            }
        }
        None if y.iter().all(|&v| v == 0.0) => {
            let mut u = vec![0.0; m];
            u[m - 1] = 1.0;
            u
        }
        None => return None,
    };
    Some(lift(&u, theta, z < 0.0))
}

/// Inverse of [`buffer_image`]: keeps the top-level colatitude and unwraps the
/// longitude with the map of the band just below it. `None` when the
/// colatitude lies in a band, at a pole, or `D = 1`. The flag reports buffers
/// met on lower levels.
pub fn buffer_preimage(params: &WrapParams, q: &[f64]) -> Option<Unwrapped> {
    assert_eq!(q.len(), params.dim + 1);
    let m = params.dim;
    if m == 1 {
        return None;
    }
    let last = q[m];
    let rest = &q[..m];
    let r = rest.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r < 1e-12 {
        return None;
    }
    let theta = r.atan2(last.abs());
    let (d, ratio) = (params.d_s, params.ratio());
    if find_band(d, ratio, theta).is_some() {
        return None;
    }
    let bands = level_bands(d, ratio);
    let band = *bands
        .iter()
        .rev()
        .find(|b| b.hi < theta)
        .or(bands.first())?;
    let u: Vec<f64> = rest.iter().map(|v| v / r).collect();
    let (mut x, in_buffer) = match band.sub {
        Some(sub) => {
            let inner = unwrap_level(sub.d, ratio, &u, false).ok()?;
            (
                inner.x.iter().map(|v| v * sub.rho).collect::<Vec<_>>(),
                inner.in_buffer,
            )
        }
        None => (vec![0.0; m - 1], (u[m - 1] - 1.0).abs() > 1e-9),
    };
    x.push(if last < 0.0 { -theta } else { theta });
    Some(Unwrapped { x, in_buffer })
}

/// Inverse of [`wrap_point`]. Colatitudes in buffers are moved to the nearest
/// band edge and flagged. The south pole has no lattice preimage and yields
/// [`WrapError::PoleAmbiguity`].
pub fn unwrap_point(params: &WrapParams, q: &[f64]) -> Result<Unwrapped, WrapError> {
    assert_eq!(q.len(), params.dim + 1);
    unwrap_level(params.d_s, params.ratio(), q, true)
}

fn unwrap_level(d: f64, ratio: f64, q: &[f64], top: bool) -> Result<Unwrapped, WrapError> {
    let m = q.len() - 1;
    if m == 1 {
        let mut t = q[1].atan2(q[0]);
        let mut in_buffer = false;
        if t > PI - d {
            in_buffer = true;
            t = if t - (PI - d) <= PI - t { PI - d } else { -PI };
        }
        return Ok(Unwrapped {
            x: vec![t],
            in_buffer,
        });
    }
    let last = q[m];
    let south = last < 0.0;
    let rest = &q[..m];
    let r = rest.iter().map(|v| v * v).sum::<f64>().sqrt();
    let theta = r.atan2(last.abs());
    let bands = level_bands(d, ratio);
    if r < 1e-12 {
        if !south {
            return Ok(Unwrapped {
                x: vec![0.0; m],
                in_buffer: false,
            });
        }
        if top {
            return Err(WrapError::PoleAmbiguity);
        }
        let mut x = vec![0.0; m];
        if let Some(b) = bands.first() {
            x[m - 1] = -b.lo;
        }
        return Ok(Unwrapped { x, in_buffer: true });
    }
    let (band, theta, mut in_buffer) = match find_band(d, ratio, theta) {
        Some((_, b)) => (b, theta, false),
        None => {
            let nearest = bands
                .iter()
                .flat_map(|b| [(b.lo, *b), (b.hi, *b)])
                .min_by(|a, b| (a.0 - theta).abs().total_cmp(&(b.0 - theta).abs()));
            match nearest {
                Some((edge, b)) => (b, edge, true),
                None => {
                    return Ok(Unwrapped {
                        x: vec![0.0; m],
                        in_buffer: true,
                    })
                }
            }
        }
    };
    let u: Vec<f64> = rest.iter().map(|v| v / r).collect();
    let mut x = match band.sub {
        Some(sub) => {
            let inner = unwrap_level(sub.d, ratio, &u, false)?;
            in_buffer |= inner.in_buffer;
            inner.x.iter().map(|v| v * sub.rho).collect()
        }
        None => {
            in_buffer |= (u[m - 1] - 1.0).abs() > 1e-9;
            vec![0.0; m - 1]
        }
    };
    x.push(if south { -theta } else { theta });
    Ok(Unwrapped { x, in_buffer })
}

/// Geodesic distance between unit vectors, `2·asin(‖p − q‖/2)`.
pub fn geodesic(p: &[f64], q: &[f64]) -> f64 {
    let chord = p
        .iter()
        .zip(q)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    2.0 * (0.5 * chord).min(1.0).asin()
}

/// Chord length of a geodesic distance.
pub fn chord(angle: f64) -> f64 {
    2.0 * (0.5 * angle.min(PI)).sin()
}
