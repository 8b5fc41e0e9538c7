//! Rotation about the diagonal axis e = (1, …, 1).

use crate::linalg::RMat;

/// Householder reflection W with W e = |e| e_1.
fn householder_diagonal(n: usize) -> RMat {
    let norm = (n as f64).sqrt();
    let mut v = nalgebra::DVector::from_element(n, 1.0);
    v[0] -= norm;
    let vv = v.dot(&v);
    RMat::identity(n, n) - (&v * v.transpose()) * (2.0 / vv)
}

/// R(α) = W_eᵗ · blockdiag(1, exp(αX)) · W_e, where X is the antisymmetric
/// matrix with +1 strictly above the diagonal.
pub fn rotation_matrix(n: usize, alpha: f64) -> RMat {
    assert!(n >= 2, "rotation needs n >= 2");
    if alpha == 0.0 {
        return RMat::identity(n, n);
    }
    let m = n - 1;
    let x = RMat::from_fn(m, m, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => alpha,
        std::cmp::Ordering::Greater => -alpha,
        std::cmp::Ordering::Equal => 0.0,
    });
    let mut r1 = RMat::identity(n, n);
    r1.view_mut((1, 1), (m, m)).copy_from(&x.exp());
    let w = householder_diagonal(n);
    w.transpose() * r1 * w
}
