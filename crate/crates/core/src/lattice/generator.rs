//! Generator matrices (rows are basis vectors).

use super::{LatticeError, LatticeFamily};
use crate::linalg::RMat;

pub fn make_generator(family: LatticeFamily, n: usize) -> Result<RMat, LatticeError> {
    use LatticeFamily::*;
    let unsupported = || LatticeError::UnsupportedLattice { family, n };
    let g = match family {
        Zn if n >= 1 => RMat::identity(n, n),
        Dn if n >= 2 => d_n(n),
        An if n >= 1 => a_n(n),
        DnDual if n >= 2 => dual(&d_n(n)),
        AnDual if n >= 1 => dual(&a_n(n)),
        E8 if n == 8 => e8(),
        K12 if n == 12 => k12(),
        BW16 if n == 16 => bw16(),
        Leech24 if n == 24 => leech24(),
        _ => return Err(unsupported()),
    };
    Ok(g)
}

fn d_n(n: usize) -> RMat {
    let mut g = RMat::zeros(n, n);
    g[(0, 0)] = -1.0;
    g[(0, 1)] = -1.0;
    for i in 1..n {
        g[(i, i - 1)] = 1.0;
        g[(i, i)] = -1.0;
    }
    g
}

/// Orthonormal basis of the sum-zero hyperplane in R^{n+1}, as the rows of an
/// n×(n+1) matrix (Helmert contrasts).
pub(crate) fn helmert(n: usize) -> RMat {
    let mut h = RMat::zeros(n, n + 1);
    for k in 1..=n {
        let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for j in 0..k {
            h[(k - 1, j)] = s;
        }
        h[(k - 1, k)] = -(k as f64) * s;
    }
    h
}

fn a_n(n: usize) -> RMat {
    let mut hyper = RMat::zeros(n, n + 1);
    for i in 0..n {
        hyper[(i, i)] = 1.0;
        hyper[(i, i + 1)] = -1.0;
    }
    hyper * helmert(n).transpose()
}

fn dual(g: &RMat) -> RMat {
    g.clone()
        .try_inverse()
        .expect("generator is nonsingular")
        .transpose()
}

fn e8() -> RMat {
    let mut g = RMat::zeros(8, 8);
    g[(0, 0)] = 2.0;
    for i in 1..7 {
        g[(i, i - 1)] = -1.0;
        g[(i, i)] = 1.0;
    }
    for j in 0..8 {
        g[(7, j)] = 0.5;
    }
    g
}

/// Row basis of the integer lattice spanned by `rows`, by Hermite reduction.
pub(crate) fn integer_row_basis(rows: &[Vec<i64>], n: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut basis = Vec::with_capacity(n);
    let mut top = 0;
    for col in 0..n {
        // Euclid on column `col` among rows top..
        loop {
            let pivot = (top..m.len())
                .filter(|&r| m[r][col] != 0)
                .min_by_key(|&r| m[r][col].abs());
            let Some(p) = pivot else { break };
            m.swap(top, p);
            let mut done = true;
            for r in top + 1..m.len() {
                if m[r][col] != 0 {
                    let q = m[r][col].div_euclid(m[top][col]);
                    let pivot_row = m[top].clone();
                    for (a, b) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                        *a -= q * b;
                    }
                    if m[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if top < m.len() && m[top][col] != 0 {
            top += 1;
        }
    }
    for row in m.iter().take(top) {
        basis.push(
            row.iter()
                .map(|&x| i64::try_from(x).expect("small entries"))
                .collect(),
        );
    }
    assert_eq!(basis.len(), n, "spanning set must have full rank");
    basis
}

fn from_integer_rows(rows: &[Vec<i64>], scale: f64) -> RMat {
    let n = rows.len();
    RMat::from_fn(n, n, |i, j| rows[i][j] as f64 * scale)
}

/// Coxeter–Todd lattice: vectors of E^6 (E the Eisenstein integers) that
/// reduce mod 2 to the hexacode, embedded in R^12.
fn k12() -> RMat {
    // F4 = {0, 1, ω, ω̄} lifted to E as (a, b) meaning a + bω.
    const ZERO: (i64, i64) = (0, 0);
    const ONE: (i64, i64) = (1, 0);
    const W: (i64, i64) = (0, 1);
    const WBAR: (i64, i64) = (-1, -1);
    let hexacode = [
        [ONE, ZERO, ZERO, ONE, WBAR, W],
        [ZERO, ONE, ZERO, ONE, W, WBAR],
        [ZERO, ZERO, ONE, ONE, ONE, ONE],
    ];
    let times_w = |(a, b): (i64, i64)| (-b, a - b);
    let flatten =
        |v: [(i64, i64); 6]| -> Vec<i64> { v.iter().flat_map(|&(a, b)| [a, b]).collect() };
    let mut gens = Vec::new();
    for word in hexacode {
        gens.push(flatten(word));
        gens.push(flatten(word.map(times_w)));
    }
    for j in 0..12 {
        let mut v = vec![0; 12];
        v[j] = 2;
        gens.push(v);
    }
    let basis = integer_row_basis(&gens, 12);
    let h = 3f64.sqrt() / 2.0;
    RMat::from_fn(12, 12, |i, j| {
        let (a, b) = (basis[i][j & !1] as f64, basis[i][j | 1] as f64);
        if j % 2 == 0 {
            a - b / 2.0
        } else {
            b * h
        }
    })
}

/// Barnes–Wall lattice: x ∈ Z^16 with x mod 2 in RM(1,4) and Σx ≡ 0 mod 4,
/// scaled by 1/√2.
fn bw16() -> RMat {
    let mut gens = Vec::new();
    gens.push(vec![1; 16]);
    for bit in 0..4 {
        gens.push((0..16).map(|j| ((j >> bit) & 1) as i64).collect());
    }
    for i in 0..16 {
        for j in i + 1..16 {
            let mut plus = vec![0; 16];
            plus[i] = 2;
            plus[j] = 2;
            let mut minus = plus.clone();
            minus[j] = -2;
            gens.push(plus);
            gens.push(minus);
        }
    }
    from_integer_rows(&integer_row_basis(&gens, 16), 1.0 / 2f64.sqrt())
}

/// Extended binary Golay code basis: shifts of the [23,12] cyclic generator
/// plus an overall parity bit.
pub(crate) fn golay_basis() -> Vec<[u8; 24]> {
    let g = [1u8, 1, 0, 0, 0, 1, 1, 1, 0, 1, 0, 1]; // 1 + x + x^5 + x^6 + x^7 + x^9 + x^11
    (0..12)
        .map(|shift| {
            let mut w = [0u8; 24];
            for (i, &bit) in g.iter().enumerate() {
                w[i + shift] = bit;
            }
            w[23] = w[..23].iter().sum::<u8>() % 2;
            w
        })
        .collect()
}

/// Leech lattice from the Golay code, scaled by 1/√8.
fn leech24() -> RMat {
    let mut gens: Vec<Vec<i64>> = golay_basis()
        .iter()
        .map(|w| w.iter().map(|&b| 2 * b as i64).collect())
        .collect();
    for i in 0..24 {
        for j in i + 1..24 {
            let mut plus = vec![0; 24];
            plus[i] = 4;
            plus[j] = 4;
            let mut minus = plus.clone();
            minus[j] = -4;
            gens.push(plus);
            gens.push(minus);
        }
    }
    let mut odd = vec![1; 24];
    odd[0] = -3;
    gens.push(odd);
    from_integer_rows(&integer_row_basis(&gens, 24), 1.0 / 8f64.sqrt())
}
