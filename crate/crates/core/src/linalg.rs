//! Dense complex matrix helpers: matrix exponential, principal logarithm of
//! unitary matrices, polar projection and small utilities.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖A†A − I‖_F`, the distance of the columns of `a` from orthonormality.
pub fn orthonormality_defect(a: &CMat) -> f64 {
    let g = a.adjoint() * a;
    frobenius(&(g - CMat::identity(a.ncols(), a.ncols())))
}

/// `Re tr(X†Y)`.
pub fn real_inner(x: &CMat, y: &CMat) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Determinant of a Hermitian positive semidefinite matrix, returned as a real
/// number (the imaginary part is rounding noise).
pub fn hermitian_det(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant().re
}

/// Matrix exponential (scaling and squaring with a Padé approximant).
pub fn expm(a: &CMat) -> CMat {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    if a.nrows() == 0 {
        return a.clone();
    }
    a.clone().exp()
}

/// Principal logarithm of a unitary matrix, via its complex Schur form.
///
/// A unitary matrix is normal, so its Schur form is diagonal up to rounding;
/// the logarithm is `Q diag(i·arg λ) Q†`. The result is made exactly
/// skew-Hermitian.
pub fn logm_unitary(u: &CMat) -> CMat {
    let n = u.nrows();
    let (q, diag) = match nalgebra::linalg::Schur::try_new(u.clone(), f64::EPSILON, 10_000) {
        Some(schur) => {
            let (q, t) = schur.unpack();
            let diag: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
            (q, diag)
        }
        None => normal_eigen(u),
    };
    let logs = DVector::from_iterator(n, diag.iter().map(|z| c(0.0, z.arg())));
    let l = &q * CMat::from_diagonal(&logs) * q.adjoint();
    skew_part(&l)
}

// Eigenvectors of a normal matrix from the Hermitian pencil
// (U + U†)/2 + γ(U − U†)/2i, whose parts commute. Used when the Schur
// iteration stalls.
fn normal_eigen(u: &CMat) -> (CMat, Vec<Complex64>) {
    const GAMMA: f64 = 0.618_033_988_749_894_8;
    let herm = (u + u.adjoint()).map(|z| z * 0.5);
    let anti = (u - u.adjoint()).map(|z| z * c(0.0, -0.5));
    let eig = (herm + anti.map(|z| z * GAMMA)).symmetric_eigen();
    let q = eig.eigenvectors;
    let diag = (0..u.nrows())
        .map(|i| {
            let col = q.column(i);
            col.dotc(&(u * col))
        })
        .collect();
    (q, diag)
}

/// `(M − M†)/2`.
pub fn skew_part(m: &CMat) -> CMat {
    (m - m.adjoint()).map(|z| z * 0.5)
}

/// Nearest matrix with orthonormal columns in Frobenius norm (`U V†` from the
/// thin SVD `M = U Σ V†`).
pub fn polar_orthonormal(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V†");
    u * v_t
}

/// Singular values of `m` in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut ChaCha8Rng, s: f64) -> CMat {
        CMat::from_fn(n, n, |_, _| {
            c(rng.random_range(-s..s), rng.random_range(-s..s))
        })
    }

    fn taylor(a: &CMat) -> CMat {
        let n = a.nrows();
        let mut sum = CMat::identity(n, n);
        let mut term = CMat::identity(n, n);
        for k in 1..80 {
            term = &term * a / c(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn expm_matches_taylor_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &s in &[1e-3, 0.05, 0.3, 1.0] {
            for n in 1..6 {
                let a = random(n, &mut rng, s);
                let err = frobenius(&(expm(&a) - taylor(&a)));
                assert!(err < 1e-12, "n={n} s={s} err={err}");
            }
        }
    }

    #[test]
    fn expm_of_diagonal() {
        let a = CMat::from_diagonal(&DVector::from_vec(vec![
            c(0.0, std::f64::consts::PI),
            c(1.0, 0.0),
        ]));
        let e = expm(&a);
        assert!((e[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((e[(1, 1)] - c(std::f64::consts::E, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn unitary_log_inverts_exp() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..6 {
            for _ in 0..20 {
                let h = random(n, &mut rng, 1.0);
                let mut s = skew_part(&h);
                let norm = frobenius(&s);
                // keep the spectrum inside (−π, π)
                s = s.map(|z| z * (2.5 / norm.max(1e-12)).min(1.0));
                let u = expm(&s);
                let l = logm_unitary(&u);
                assert!(frobenius(&(&l - &s)) < 1e-10, "n={n}");
            }
        }
    }

    #[test]
    fn normal_eigen_fallback_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in 1..6 {
            let s = skew_part(&random(n, &mut rng, 0.6));
            let u = expm(&s);
            let (q, diag) = normal_eigen(&u);
            let back = &q * CMat::from_diagonal(&DVector::from_vec(diag)) * q.adjoint();
            assert!(frobenius(&(back - u)) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn polar_gives_orthonormal_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = CMat::from_fn(4, 2, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let p = polar_orthonormal(&m);
        assert!(orthonormality_defect(&p) < 1e-13);
    }
}
