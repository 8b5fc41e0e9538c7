//! Lattice point enumeration: LLL preconditioning, Schnorr–Euchner search in
//! a ball, box enumeration and shortest vectors.

use crate::linalg::RMat;

/// LLL-reduced basis together with the unimodular transform `U` such that
/// `reduced = U · original` (rows).
#[derive(Clone, Debug)]
pub(crate) struct Reduction {
    pub basis: RMat,
    pub unimodular: Vec<Vec<i64>>,
}

fn gram_schmidt(b: &RMat) -> (RMat, RMat, Vec<f64>) {
    let n = b.nrows();
    let mut star = b.clone();
    let mut mu = RMat::zeros(n, n);
    let mut norms = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let m = b.row(i).dot(&star.row(j)) / norms[j];
            mu[(i, j)] = m;
            let sj = star.row(j).clone_owned();
            let mut ri = star.row_mut(i);
            ri -= sj * m;
        }
        norms[i] = star.row(i).norm_squared();
    }
    (star, mu, norms)
}

pub(crate) fn lll(basis: &RMat, delta: f64) -> Reduction {
    let n = basis.nrows();
    let mut b = basis.clone();
    let mut u: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    let (_, mut mu, mut norms) = gram_schmidt(&b);
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        assert!(guard < 1_000_000, "LLL did not terminate");
        for j in (0..k).rev() {
            let q = mu[(k, j)].round();
            if q != 0.0 {
                let bj = b.row(j).clone_owned();
                let mut bk = b.row_mut(k);
                bk -= bj * q;
                let qi = q as i64;
                let uj = u[j].clone();
                for (x, y) in u[k].iter_mut().zip(uj) {
                    *x -= qi * y;
                }
                for l in 0..j {
                    mu[(k, l)] -= q * mu[(j, l)];
                }
                mu[(k, j)] -= q;
            }
        }
        if norms[k] >= (delta - mu[(k, k - 1)].powi(2)) * norms[k - 1] {
            k += 1;
        } else {
            b.swap_rows(k, k - 1);
            u.swap(k, k - 1);
            let (_, m, nr) = gram_schmidt(&b);
            mu = m;
            norms = nr;
            k = (k - 1).max(1);
        }
    }
    Reduction {
        basis: b,
        unimodular: u,
    }
}

/// Triangular form of a basis for depth-first search: `Bᵗ = Q R`.
#[derive(Clone, Debug)]
pub(crate) struct Triangular {
    r: RMat,
    qt: RMat,
    // spread[k*n + j] = length of axis j projected onto the span of the first
    // k basis vectors
    spread: Vec<f64>,
}

impl Triangular {
    pub fn new(basis_rows: &RMat) -> Self {
        let qr = basis_rows.transpose().qr();
        let qt = qr.q().transpose();
        let n = qt.nrows();
        let mut spread = vec![0.0; (n + 1) * n];
        for k in 1..=n {
            for j in 0..n {
                spread[k * n + j] = spread[(k - 1) * n + j] + qt[(k - 1, j)].powi(2);
            }
        }
        for v in &mut spread {
            *v = v.sqrt();
        }
        Triangular {
            r: qr.r(),
            qt,
            spread,
        }
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    /// Babai nearest-plane point, returned as integer coordinates.
    pub fn babai(&self, target: &[f64]) -> Vec<i64> {
        let n = self.dim();
        let y = &self.qt * nalgebra::DVector::from_column_slice(target);
        let mut z = vec![0i64; n];
        for k in (0..n).rev() {
            let mut s = y[k];
            for (j, &zj) in z.iter().enumerate().skip(k + 1) {
                s -= self.r[(k, j)] * zj as f64;
            }
            z[k] = (s / self.r[(k, k)]).round() as i64;
        }
        z
    }

    /// Schnorr–Euchner enumeration of all integer vectors `z` with
    /// `‖Bᵗz − target‖² ≤ radius2`. The visitor receives each point with its
    /// squared distance and returns the (possibly shrunk) radius to continue
    /// with.
    pub fn search<F>(&self, target: &[f64], radius2: f64, visit: F)
    where
        F: FnMut(&[i64], f64) -> f64,
    {
        self.search_impl(target, radius2, None, visit)
    }

    /// Like [`Triangular::search`] but only visits points with
    /// `|(Bᵗz − target)_j| ≤ half[j]` for every axis. A subtree is skipped as
    /// soon as the ball of remaining freedom around its partial point misses
    /// the box on some axis.
    pub fn search_box<F>(&self, target: &[f64], radius2: f64, half: &[f64], visit: F)
    where
        F: FnMut(&[i64], f64) -> f64,
    {
        self.search_impl(target, radius2, Some(half), visit)
    }

    fn search_impl<F>(&self, target: &[f64], mut radius2: f64, half: Option<&[f64]>, mut visit: F)
    where
        F: FnMut(&[i64], f64) -> f64,
    {
        let n = self.dim();
        if n == 0 {
            return;
        }
        let y = &self.qt * nalgebra::DVector::from_column_slice(target);
        let r = &self.r;
        let mut z = vec![0i64; n];
        let mut center = vec![0.0; n];
        let mut step = vec![0i64; n];
        let mut partial = vec![0.0; n + 1];
        // offset[k] = component of (point − target) orthogonal to the span of
        // the first k basis vectors, fixed once z_k..z_{n-1} are chosen.
        let mut offset = vec![0.0; (n + 1) * n];
        let spread = &self.spread;
        let init = |k: usize, z: &mut [i64], center: &mut [f64], step: &mut [i64]| {
            let mut s = y[k];
            for j in k + 1..n {
                s -= r[(k, j)] * z[j] as f64;
            }
            let c = s / r[(k, k)];
            center[k] = c;
            z[k] = c.round() as i64;
            step[k] = if c >= z[k] as f64 { 1 } else { -1 };
        };
        let advance = |k: usize, z: &mut [i64], step: &mut [i64]| {
            z[k] += step[k];
            step[k] = -step[k] - step[k].signum();
        };

        let mut k = n - 1;
        init(k, &mut z, &mut center, &mut step);
        loop {
            let lead = r[(k, k)] * (z[k] as f64 - center[k]);
            let d = partial[k + 1] + lead * lead;
            if d <= radius2 {
                let inside = match half {
                    None => true,
                    Some(h) => {
                        let rho = (radius2 - d).max(0.0).sqrt();
                        let (done, rest) = offset.split_at_mut((k + 1) * n);
                        let prev = &rest[..n];
                        let cur = &mut done[k * n..(k + 1) * n];
                        let mut ok = true;
                        for j in 0..n {
                            let v = prev[j] + self.qt[(k, j)] * lead;
                            cur[j] = v;
                            if v.abs() - rho * spread[k * n + j] > h[j] {
                                ok = false;
                            }
                        }
                        ok
                    }
                };
                if !inside {
                    advance(k, &mut z, &mut step);
                } else if k == 0 {
                    radius2 = visit(&z, d);
                    advance(0, &mut z, &mut step);
                } else {
                    partial[k] = d;
                    k -= 1;
                    init(k, &mut z, &mut center, &mut step);
                }
            } else {
                k += 1;
                if k == n {
                    return;
                }
                advance(k, &mut z, &mut step);
            }
        }
    }
}

/// Maps coordinates in a reduced basis back to the original basis: `c = zᵗU`.
pub(crate) fn to_original(z: &[i64], u: &[Vec<i64>]) -> Vec<i64> {
    let n = z.len();
    let mut c = vec![0i64; n];
    for (zi, row) in z.iter().zip(u) {
        if *zi != 0 {
            for j in 0..n {
                c[j] += zi * row[j];
            }
        }
    }
    c
}

/// Squared length of the shortest nonzero vector, found by enumeration in a
/// ball of radius 1.1× the shortest reduced basis vector.
pub(crate) fn shortest_vector(reduced: &RMat) -> f64 {
    let n = reduced.nrows();
    let first = (0..n)
        .map(|i| reduced.row(i).norm_squared())
        .fold(f64::INFINITY, f64::min);
    let tri = Triangular::new(reduced);
    let mut best = first;
    tri.search(&vec![0.0; n], first * 1.21, |z, d| {
        if z.iter().any(|&v| v != 0) && d < best {
            best = d;
        }
        best * (1.0 + 1e-9)
    });
    best
}

/// All nonzero vectors of squared length at most `radius2`, as coordinates in
/// the reduced basis.
pub(crate) fn short_vectors(reduced: &RMat, radius2: f64) -> Vec<(Vec<i64>, f64)> {
    let n = reduced.nrows();
    let tri = Triangular::new(reduced);
    let mut out = Vec::new();
    tri.search(&vec![0.0; n], radius2, |z, d| {
        if z.iter().any(|&v| v != 0) {
            out.push((z.to_vec(), d));
        }
        radius2
    });
    out
}

/// Box enumeration prepared for one box shape (half-widths). The basis is
/// rescaled per axis so the box becomes a cube inside a ball, then reduced.
#[derive(Clone, Debug)]
pub(crate) struct BoxShape {
    widths: Vec<f64>,
    half: Vec<f64>,
    radius2: f64,
    tri: Triangular,
    unimodular: Vec<Vec<i64>>,
}

impl BoxShape {
    pub fn new(basis: &RMat, half_widths: &[f64], floor: f64) -> Self {
        let n = basis.nrows();
        let widths: Vec<f64> = half_widths.iter().map(|&h| h.max(floor)).collect();
        let radius2 = half_widths
            .iter()
            .zip(&widths)
            .map(|(h, w)| (h / w).powi(2))
            .sum::<f64>()
            * (1.0 + 1e-9)
            + 1e-12;
        let skewed = RMat::from_fn(n, n, |i, j| basis[(i, j)] / widths[j]);
        let red = lll(&skewed, 0.99);
        let half = half_widths
            .iter()
            .zip(&widths)
            .map(|(h, w)| h / w * (1.0 + 1e-9) + 1e-12)
            .collect();
        BoxShape {
            widths,
            half,
            radius2,
            tri: Triangular::new(&red.basis),
            unimodular: red.unimodular,
        }
    }

    /// Original-basis coefficients of the lattice points in the box centered
    /// at `center`, up to a relative 1e−9 margin. Callers filter exactly.
    pub fn candidates(&self, center: &[f64]) -> Vec<Vec<i64>> {
        let t: Vec<f64> = center
            .iter()
            .zip(&self.widths)
            .map(|(c, w)| c / w)
            .collect();
        let mut out = Vec::new();
        let radius2 = self.radius2;
        self.tri.search_box(&t, radius2, &self.half, |z, _| {
            out.push(to_original(z, &self.unimodular));
            radius2
        });
        out
    }
}
