//! Lattices: generators, design-distance scaling, diagonal-axis rotation,
//! enumeration and closest-point search.

mod cvp;
pub(crate) mod enumerate;
mod generator;
mod rotation;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linalg::RMat;
pub use cvp::{closest_point, closest_point_search};
pub use generator::make_generator;
pub use rotation::rotation_matrix;

use enumerate::{BoxShape, Reduction, Triangular};

/// Default cap on the estimated number of points in an enumeration box.
pub const DEFAULT_BOX_CAP: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LatticeFamily {
    Zn,
    An,
    Dn,
    AnDual,
    DnDual,
    E8,
    K12,
    BW16,
    Leech24,
}

impl LatticeFamily {
    pub const ALL: [LatticeFamily; 9] = [
        LatticeFamily::Zn,
        LatticeFamily::An,
        LatticeFamily::Dn,
        LatticeFamily::AnDual,
        LatticeFamily::DnDual,
        LatticeFamily::E8,
        LatticeFamily::K12,
        LatticeFamily::BW16,
        LatticeFamily::Leech24,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LatticeFamily::Zn => "Zn",
            LatticeFamily::An => "An",
            LatticeFamily::Dn => "Dn",
            LatticeFamily::AnDual => "An_dual",
            LatticeFamily::DnDual => "Dn_dual",
            LatticeFamily::E8 => "E8",
            LatticeFamily::K12 => "K12",
            LatticeFamily::BW16 => "BW16",
            LatticeFamily::Leech24 => "Leech24",
        }
    }
}

impl fmt::Display for LatticeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeFamily {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['-', '_', '*'], "");
        let family = match key.as_str() {
            "zn" | "z" => LatticeFamily::Zn,
            "an" | "a" => LatticeFamily::An,
            "dn" | "d" => LatticeFamily::Dn,
            "andual" => LatticeFamily::AnDual,
            "dndual" => LatticeFamily::DnDual,
            "e8" => LatticeFamily::E8,
            "k12" => LatticeFamily::K12,
            "bw16" => LatticeFamily::BW16,
            "leech24" | "leech" => LatticeFamily::Leech24,
            _ => return Err(LatticeError::UnknownFamily(s.to_string())),
        };
        Ok(family)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatticeError {
    #[error("lattice {family} is not available in dimension {n}")]
    UnsupportedLattice { family: LatticeFamily, n: usize },
    #[error("unknown lattice family {0:?}")]
    UnknownFamily(String),
    #[error("box holds about {estimate:.3e} points, over the cap of {cap:.3e}")]
    BoxTooLarge { estimate: f64, cap: f64 },
    #[error("invalid box: lower bound exceeds upper bound on axis {0}")]
    InvalidBox(usize),
}

/// Integer coefficients with respect to the generator rows and the resulting
/// point after scaling and rotation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub coeffs: Vec<i64>,
    pub embedding: Vec<f64>,
}

#[derive(Debug)]
struct Shared {
    generator: RMat,
    reduction: Reduction,
    min_norm_unscaled: f64,
    generator_det: f64,
}

/// A lattice together with its scale and rotation angle.
///
/// Points are `scale · c·G · Rᵗ(α)` for integer row vectors `c`.
#[derive(Clone, Debug)]
pub struct LatticeSpec {
    family: LatticeFamily,
    n: usize,
    scale: f64,
    alpha: f64,
    shared: Arc<Shared>,
    rotation: RMat,
    basis: RMat,
    reduced: RMat,
    tri: Triangular,
}

impl LatticeSpec {
    pub fn new(family: LatticeFamily, n: usize) -> Result<Self, LatticeError> {
        let generator = make_generator(family, n)?;
        let reduction = enumerate::lll(&generator, 0.99);
        let min_norm_unscaled = enumerate::shortest_vector(&reduction.basis).sqrt();
        let generator_det = generator.determinant().abs();
        let shared = Arc::new(Shared {
            generator,
            reduction,
            min_norm_unscaled,
            generator_det,
        });
        Ok(Self::assemble(family, n, 1.0, 0.0, shared))
    }

    fn assemble(
        family: LatticeFamily,
        n: usize,
        scale: f64,
        alpha: f64,
        shared: Arc<Shared>,
    ) -> Self {
        let rotation = if n >= 2 {
            rotation_matrix(n, alpha)
        } else {
            RMat::identity(n, n)
        };
        let basis = &shared.generator * rotation.transpose() * scale;
        let u = RMat::from_fn(n, n, |i, j| shared.reduction.unimodular[i][j] as f64);
        let reduced = &u * &basis;
        let tri = Triangular::new(&reduced);
        LatticeSpec {
            family,
            n,
            scale,
            alpha,
            shared,
            rotation,
            basis,
            reduced,
            tri,
        }
    }

    pub fn with_scale(&self, scale: f64) -> Self {
        assert!(scale > 0.0 && scale.is_finite(), "scale must be positive");
        Self::assemble(self.family, self.n, scale, self.alpha, self.shared.clone())
    }

    pub fn with_rotation(&self, alpha: f64) -> Self {
        Self::assemble(self.family, self.n, self.scale, alpha, self.shared.clone())
    }

    pub fn family(&self) -> LatticeFamily {
        self.family
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Unscaled, unrotated generator.
    pub fn generator(&self) -> &RMat {
        &self.shared.generator
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rotation(&self) -> &RMat {
        &self.rotation
    }

    /// Effective generator `scale · G · Rᵗ`.
    pub fn basis(&self) -> &RMat {
        &self.basis
    }

    /// |det G| of the unscaled generator.
    pub fn generator_det(&self) -> f64 {
        self.shared.generator_det
    }

    /// det(G Gᵗ) of the unscaled generator.
    pub fn gram_det(&self) -> f64 {
        self.shared.generator_det.powi(2)
    }

    /// Volume of a fundamental cell of the scaled lattice.
    pub fn covolume(&self) -> f64 {
        self.shared.generator_det * self.scale.powi(self.n as i32)
    }

    /// Minimal distance of the unscaled lattice, computed once at construction.
    pub fn unscaled_minimal_distance(&self) -> f64 {
        self.shared.min_norm_unscaled
    }

    pub fn embed(&self, coeffs: &[i64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.n);
        (0..self.n)
            .map(|j| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| c as f64 * self.basis[(i, j)])
                    .sum()
            })
            .collect()
    }

    pub fn point(&self, coeffs: Vec<i64>) -> LatticePoint {
        let embedding = self.embed(&coeffs);
        LatticePoint { coeffs, embedding }
    }

    /// Maps a point to the unscaled, unrotated frame: `x·R / scale`.
    pub(crate) fn to_canonical(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                (0..self.n)
                    .map(|i| x[i] * self.rotation[(i, j)])
                    .sum::<f64>()
                    / self.scale
            })
            .collect()
    }

    pub(crate) fn reduced_basis(&self) -> &RMat {
        &self.reduced
    }

    pub(crate) fn unimodular(&self) -> &[Vec<i64>] {
        &self.shared.reduction.unimodular
    }

    pub(crate) fn triangular(&self) -> &Triangular {
        &self.tri
    }

    /// Nonzero lattice points of norm at most `radius`, sorted by length then
    /// coefficients.
    pub fn short_vectors(&self, radius: f64) -> Vec<LatticePoint> {
        let mut found: Vec<(Vec<i64>, f64)> =
            enumerate::short_vectors(&self.reduced, radius * radius * (1.0 + 1e-12))
                .into_iter()
                .map(|(z, d)| (enumerate::to_original(&z, self.unimodular()), d))
                .collect();
        found.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        found.into_iter().map(|(c, _)| self.point(c)).collect()
    }
}

/// Sets the scale so the minimal distance equals `d_s`.
pub fn scale_to_design_distance(spec: &LatticeSpec, d_s: f64) -> LatticeSpec {
    assert!(d_s > 0.0, "design distance must be positive");
    spec.with_scale(d_s / spec.unscaled_minimal_distance())
}

/// Length of the shortest nonzero vector of the scaled, rotated lattice.
pub fn minimal_distance(spec: &LatticeSpec) -> f64 {
    enumerate::shortest_vector(spec.reduced_basis()).sqrt()
}

/// Reusable box enumerator for one lattice; box shapes are prepared once and
/// may be reused for many centers.
pub struct BoxEnumerator<'a> {
    spec: &'a LatticeSpec,
    pub cap: f64,
}

/// A prepared box shape for [`BoxEnumerator`].
pub struct PreparedShape {
    half_widths: Vec<f64>,
    shape: BoxShape,
}

impl<'a> BoxEnumerator<'a> {
    pub fn new(spec: &'a LatticeSpec) -> Self {
        BoxEnumerator {
            spec,
            cap: DEFAULT_BOX_CAP,
        }
    }

    fn floor(&self) -> f64 {
        0.25 * self.spec.unscaled_minimal_distance() * self.spec.scale()
    }

    /// Estimated lattice points in the ball searched for a box of this shape.
    pub fn estimate(&self, half_widths: &[f64]) -> f64 {
        let floor = self.floor();
        half_widths
            .iter()
            .map(|h| 2.0 * h.max(floor))
            .product::<f64>()
            / self.spec.covolume()
    }

    pub fn prepare(&self, half_widths: &[f64]) -> Result<PreparedShape, LatticeError> {
        let estimate = self.estimate(half_widths);
        if estimate > self.cap {
            return Err(LatticeError::BoxTooLarge {
                estimate,
                cap: self.cap,
            });
        }
        Ok(PreparedShape {
            half_widths: half_widths.to_vec(),
            shape: BoxShape::new(self.spec.basis(), half_widths, self.floor()),
        })
    }

    /// Lattice points in the closed box `center ± half_widths`.
    pub fn points(&self, prepared: &PreparedShape, center: &[f64]) -> Vec<LatticePoint> {
        let tol = 1e-12 * (1.0 + self.spec.scale());
        let mut pts: Vec<LatticePoint> = prepared
            .shape
            .candidates(center)
            .into_iter()
            .map(|c| self.spec.point(c))
            .filter(|p| {
                p.embedding
                    .iter()
                    .zip(center)
                    .zip(&prepared.half_widths)
                    .all(|((x, c), h)| (x - c).abs() <= h + tol)
            })
            .collect();
        pts.sort_by(|a, b| a.coeffs.cmp(&b.coeffs));
        pts
    }
}

/// Every lattice point whose embedding lies in the closed box `[lower, upper]`,
/// sorted by coefficients.
pub fn enumerate_in_box(
    spec: &LatticeSpec,
    lower: &[f64],
    upper: &[f64],
) -> Result<Vec<LatticePoint>, LatticeError> {
    enumerate_in_box_capped(spec, lower, upper, DEFAULT_BOX_CAP)
}

pub fn enumerate_in_box_capped(
    spec: &LatticeSpec,
    lower: &[f64],
    upper: &[f64],
    cap: f64,
) -> Result<Vec<LatticePoint>, LatticeError> {
    assert_eq!(lower.len(), spec.dimension());
    assert_eq!(upper.len(), spec.dimension());
    if let Some(axis) = (0..lower.len()).find(|&j| lower[j] > upper[j]) {
        return Err(LatticeError::InvalidBox(axis));
    }
    let center: Vec<f64> = lower
        .iter()
        .zip(upper)
        .map(|(l, u)| 0.5 * (l + u))
        .collect();
    let half: Vec<f64> = lower
        .iter()
        .zip(upper)
        .map(|(l, u)| 0.5 * (u - l))
        .collect();
    let mut en = BoxEnumerator::new(spec);
    en.cap = cap;
    let prepared = en.prepare(&half)?;
    Ok(en.points(&prepared, &center))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_round_trip() {
        for f in LatticeFamily::ALL {
            assert_eq!(f.name().parse::<LatticeFamily>().unwrap(), f);
        }
        assert!("foo".parse::<LatticeFamily>().is_err());
    }

    #[test]
    fn unsupported_pairs_are_rejected() {
        assert!(matches!(
            make_generator(LatticeFamily::K12, 8),
            Err(LatticeError::UnsupportedLattice { .. })
        ));
        assert!(make_generator(LatticeFamily::E8, 8).is_ok());
    }

    #[test]
    fn z2_box_has_nine_points() {
        let z2 = LatticeSpec::new(LatticeFamily::Zn, 2).unwrap();
        let pts = enumerate_in_box(&z2, &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(pts.len(), 9);
    }

    #[test]
    fn oversized_box_is_refused() {
        let z = LatticeSpec::new(LatticeFamily::Zn, 12).unwrap();
        let err = enumerate_in_box(&z, &[-10.0; 12], &[10.0; 12]).unwrap_err();
        assert!(matches!(err, LatticeError::BoxTooLarge { .. }));
    }
}
