//! Transfer between the sphere S^D and the complex Stiefel manifold
//! V(n_t, T): sphere exponential and logarithm at the north pole, the fixed
//! orthonormal basis of the Stiefel tangent space at `[I; 0]`, and the Stiefel
//! exponential with its iterative inverse.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{
    c, expm, frobenius, logm_unitary, polar_orthonormal, real_inner, singular_values, skew_part,
    CMat, I,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManifoldError {
    #[error("point is on the cut locus of the north pole (colatitude {0})")]
    CutLocus(f64),
    #[error("matrix is not skew-Hermitian (defect {0})")]
    NotSkewHermitian(f64),
    #[error("Stiefel logarithm did not converge (residual {0})")]
    NotConverged(f64),
    #[error("invalid Stiefel shape n_t = {nt}, T = {t}")]
    InvalidShape { nt: usize, t: usize },
}

/// Real dimension `n_t(2T − n_t)` of V(n_t, T).
pub fn dimension(nt: usize, t: usize) -> Result<usize, ManifoldError> {
    if nt == 0 || nt > t {
        return Err(ManifoldError::InvalidShape { nt, t });
    }
    Ok(nt * (2 * t - nt))
}

/// Tangent vector at the north pole `e_{D+1}` pointing to `q`, with length
/// equal to the geodesic distance.
pub fn sphere_log_north(q: &[f64]) -> Result<Vec<f64>, ManifoldError> {
    let d = q.len() - 1;
    let rest = &q[..d];
    let r = rest.iter().map(|v| v * v).sum::<f64>().sqrt();
    let theta = r.atan2(q[d]);
    if theta > PI - 1e-9 {
        return Err(ManifoldError::CutLocus(theta));
    }
    if theta < 1e-12 {
        return Ok(vec![0.0; d]);
    }
    Ok(rest.iter().map(|v| theta * v / r).collect())
}

pub fn sphere_exp_north(v: &[f64]) -> Vec<f64> {
    let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut q: Vec<f64> = if r == 0.0 {
        vec![0.0; v.len()]
    } else {
        let s = r.sin() / r;
        v.iter().map(|a| a * s).collect()
    };
    q.push(r.cos());
    q
}

/// Orthonormal basis of the tangent space of V(n_t, T) at `[I; 0]`, embedded
/// as skew-Hermitian `T×T` matrices `[[A, −B†], [B, 0]]` and ordered as:
/// `i·E_jj`; for each `j < k` the pair `(E_kj − E_jk)/√2`, `i(E_kj + E_jk)/√2`;
/// then for each entry of `B` in row-major order its real and imaginary unit,
/// each scaled by `1/√2`. Orthonormal under `Re tr(X†Y)`.
pub fn stiefel_basis(nt: usize, t: usize) -> Result<Vec<CMat>, ManifoldError> {
    let dim = dimension(nt, t)?;
    let mut out = Vec::with_capacity(dim);
    let zero = || CMat::zeros(t, t);
    for j in 0..nt {
        let mut x = zero();
        x[(j, j)] = I;
        out.push(x);
    }
    for j in 0..nt {
        for k in j + 1..nt {
            let mut x = zero();
            x[(k, j)] = c(FRAC_1_SQRT_2, 0.0);
            x[(j, k)] = c(-FRAC_1_SQRT_2, 0.0);
            out.push(x);
            let mut x = zero();
            x[(k, j)] = c(0.0, FRAC_1_SQRT_2);
            x[(j, k)] = c(0.0, FRAC_1_SQRT_2);
            out.push(x);
        }
    }
    for r in nt..t {
        for col in 0..nt {
            for unit in [c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)] {
                let mut x = zero();
                x[(r, col)] = unit;
                x[(col, r)] = -unit.conj();
                out.push(x);
            }
        }
    }
    debug_assert_eq!(out.len(), dim);
    Ok(out)
}

/// `Σ v_k X_k`.
pub fn tangent_transfer(v: &[f64], basis: &[CMat]) -> CMat {
    assert_eq!(
        v.len(),
        basis.len(),
        "coordinate count must match the basis"
    );
    let t = basis.first().map_or(0, |x| x.nrows());
    let mut omega = CMat::zeros(t, t);
    for (vk, x) in v.iter().zip(basis) {
        if *vk != 0.0 {
            omega += x.map(|z| z * *vk);
        }
    }
    omega
}

/// Coordinates of a tangent matrix in an orthonormal basis.
pub fn tangent_coords(omega: &CMat, basis: &[CMat]) -> Vec<f64> {
    basis.iter().map(|x| real_inner(x, omega)).collect()
}

fn skew_defect(m: &CMat) -> f64 {
    frobenius(&(m + m.adjoint()))
}

/// `expm(Ω)·[I_{n_t}; 0]`.
pub fn stiefel_exp(omega: &CMat, nt: usize) -> Result<CMat, ManifoldError> {
    let defect = skew_defect(omega);
    if defect > 1e-10 * (1.0 + frobenius(omega)) {
        return Err(ManifoldError::NotSkewHermitian(defect));
    }
    let e = expm(omega);
    Ok(e.columns(0, nt).into_owned())
}

pub const LOG_MAX_ITER: usize = 200;
pub const LOG_TOL: f64 = 1e-10;

/// Unitary completion `[Φ, Φ⊥]`. `Φ⊥` is the orthonormal factor of the
/// projection of `[0; I]` onto the complement of `Φ`, the completion closest
/// to the base point's; when that projection is rank deficient a Householder
/// QR completion is used instead.
fn complete(phi: &CMat) -> CMat {
    let (t, nt) = phi.shape();
    let p = t - nt;
    let mut u = CMat::zeros(t, t);
    u.columns_mut(0, nt).copy_from(phi);
    if p == 0 {
        return u;
    }
    let mut base = CMat::zeros(t, p);
    base.view_mut((nt, 0), (p, p)).fill_with_identity();
    let proj = &base - phi * (phi.adjoint() * &base);
    if singular_values(&proj).last().is_some_and(|s| *s > 1e-3) {
        let perp = polar_orthonormal(&proj);
        u.columns_mut(nt, p).copy_from(&perp);
        return u;
    }
    let mut ext = CMat::zeros(t, nt + t);
    ext.columns_mut(0, nt).copy_from(phi);
    ext.columns_mut(nt, t).copy_from(&CMat::identity(t, t));
    let q = ext.qr().q();
    for j in nt..t {
        let mut col = q.column(j).into_owned();
        // re-orthogonalise against Φ and the earlier columns
        for i in 0..j {
            let prev = u.column(i).into_owned();
            let proj = prev.dotc(&col);
            col -= prev * proj;
        }
        let n = col.norm();
        col /= c(n, 0.0);
        u.column_mut(j).copy_from(&col);
    }
    u
}

/// Inverse of [`stiefel_exp`]: a skew-Hermitian `Ω` with zero lower-right
/// block and `expm(Ω)[I; 0] = Φ`. Iterates on the completion `Φ⊥`: take the
/// principal logarithm of `[Φ, Φ⊥]`, and rotate `Φ⊥` by `exp(−C)` where `C`
/// is the lower-right block, until `C` vanishes. Far from the base point that
/// iteration slows to a crawl, so once it is close and slow the result is
/// finished by Gauss-Newton in tangent coordinates.
pub fn stiefel_log(phi: &CMat) -> Result<CMat, ManifoldError> {
    let (t, nt) = phi.shape();
    if nt == 0 || nt > t {
        return Err(ManifoldError::InvalidShape { nt, t });
    }
    let u = complete(phi);
    let first = log_from(phi, u.clone());
    if first.is_ok() || t == nt {
        return first;
    }
    // The principal logarithm can jump branches on the way; restart from
    // a few fixed rotations of the completion.
    let p = t - nt;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5f1e);
    for _ in 0..RESTARTS {
        let g = CMat::from_fn(p, p, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let rot = expm(&skew_part(&g).map(|z| z * 2.0));
        let mut v = u.clone();
        let perp = u.columns(nt, p) * rot;
        v.columns_mut(nt, p).copy_from(&perp);
        if let Ok(omega) = log_from(phi, v) {
            return Ok(omega);
        }
    }
    first
}

const RESTARTS: usize = 8;

fn log_from(phi: &CMat, mut u: CMat) -> Result<CMat, ManifoldError> {
    let (t, nt) = phi.shape();
    let p = t - nt;
    let mut best: Option<(f64, CMat)> = None;
    let mut prev = f64::INFINITY;
    for _ in 0..LOG_MAX_ITER {
        let mut l = logm_unitary(&u);
        if p == 0 {
            return Ok(l);
        }
        let block = l.view((nt, nt), (p, p)).into_owned();
        let residual = frobenius(&block);
        l.view_mut((nt, nt), (p, p)).fill(c(0.0, 0.0));
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, l.clone()));
        }
        if residual < 1e-3 * LOG_TOL || (residual < NEWTON_START && residual > 0.6 * prev) {
            break;
        }
        prev = residual;
        let rot = expm(&(-block));
        let perp = u.columns(nt, p) * rot;
        u.columns_mut(nt, p).copy_from(&perp);
    }
    let (residual, omega) = best.expect("at least one iteration");
    if residual < 1e-3 * LOG_TOL {
        return Ok(skew_part(&omega));
    }
    if residual < NEWTON_START {
        return gauss_newton(phi, skew_part(&omega));
    }
    Err(ManifoldError::NotConverged(residual))
}

const NEWTON_START: f64 = 1e-2;

/// Derivative of `Ω ↦ expm(Ω)[I; 0]` in direction `X`, read off the
/// upper-right block of `expm([[Ω, X], [0, Ω]])`.
fn exp_derivative(omega: &CMat, x: &CMat, nt: usize) -> CMat {
    let t = omega.nrows();
    let mut big = CMat::zeros(2 * t, 2 * t);
    big.view_mut((0, 0), (t, t)).copy_from(omega);
    big.view_mut((t, t), (t, t)).copy_from(omega);
    big.view_mut((0, t), (t, t)).copy_from(x);
    expm(&big).view((0, t), (t, nt)).into_owned()
}

fn realify(m: &CMat) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn gauss_newton(phi: &CMat, start: CMat) -> Result<CMat, ManifoldError> {
    let (t, nt) = phi.shape();
    let basis = stiefel_basis(nt, t)?;
    let mut v = tangent_coords(&start, &basis);
    let mut mismatch = f64::INFINITY;
    for _ in 0..30 {
        let omega = tangent_transfer(&v, &basis);
        let diff = expm(&omega).columns(0, nt).into_owned() - phi;
        mismatch = frobenius(&diff);
        if mismatch < 1e-14 {
            break;
        }
        let rows = 2 * t * nt;
        let mut jac = DMatrix::<f64>::zeros(rows, basis.len());
        for (k, x) in basis.iter().enumerate() {
            let col = realify(&exp_derivative(&omega, x, nt));
            jac.column_mut(k).copy_from_slice(&col);
        }
        let rhs = DVector::from_vec(realify(&diff));
        let step = jac
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|_| ManifoldError::NotConverged(mismatch))?;
        for (vk, s) in v.iter_mut().zip(step.iter()) {
            *vk -= s;
        }
        if step.norm() < 1e-15 * (1.0 + v.iter().map(|a| a * a).sum::<f64>().sqrt()) {
            break;
        }
    }
    if mismatch < 1e-11 {
        Ok(tangent_transfer(&v, &basis))
    } else {
        Err(ManifoldError::NotConverged(mismatch))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(2, 4).unwrap(), 12);
        assert_eq!(dimension(1, 1).unwrap(), 1);
        assert_eq!(dimension(2, 2).unwrap(), 4);
        assert!(dimension(3, 2).is_err());
    }

    #[test]
    fn sphere_examples() {
        assert_eq!(sphere_log_north(&[0.0, 0.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        let v = sphere_log_north(&[1.0, 0.0, 0.0]).unwrap();
        assert!((v[0] - PI / 2.0).abs() < 1e-15 && v[1] == 0.0);
        assert!(matches!(
            sphere_log_north(&[0.0, 0.0, -1.0]),
            Err(ManifoldError::CutLocus(_))
        ));
        let s = sphere_exp_north(&[PI, 0.0]);
        assert!((s[2] + 1.0).abs() < 1e-15 && s[0].abs() < 1e-15);
    }

    #[test]
    fn single_element_basis() {
        let b = stiefel_basis(1, 1).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0][(0, 0)], I);
    }

    #[test]
    fn closed_form_exponentials() {
        let omega = CMat::from_row_slice(
            2,
            2,
            &[
                c(0.0, 0.0),
                c(-PI / 2.0, 0.0),
                c(PI / 2.0, 0.0),
                c(0.0, 0.0),
            ],
        );
        let phi = stiefel_exp(&omega, 1).unwrap();
        assert!((phi[(0, 0)]).norm() < 1e-15 && (phi[(1, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        let back = stiefel_log(&phi).unwrap();
        assert!(frobenius(&(back - &omega)) < 1e-10);

        let omega =
            CMat::from_row_slice(2, 2, &[c(0.0, PI), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let phi = stiefel_exp(&omega, 1).unwrap();
        assert!((phi[(0, 0)] + c(1.0, 0.0)).norm() < 1e-15 && phi[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn base_point_has_zero_log() {
        let mut phi = CMat::zeros(4, 2);
        phi[(0, 0)] = c(1.0, 0.0);
        phi[(1, 1)] = c(1.0, 0.0);
        assert!(frobenius(&stiefel_log(&phi).unwrap()) < 1e-12);
        assert!(frobenius(&(stiefel_exp(&CMat::zeros(4, 4), 2).unwrap() - phi)) == 0.0);
    }

    #[test]
    fn non_skew_input_is_rejected() {
        let m = CMat::identity(2, 2);
        assert!(matches!(
            stiefel_exp(&m, 1),
            Err(ManifoldError::NotSkewHermitian(_))
        ));
    }
}
