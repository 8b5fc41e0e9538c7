//! Closest-point search. Z_n, D_n and A_n use the Conway–Sloane decoders in
//! their canonical frame; every family falls back to a sphere decoder seeded
//! by Babai's nearest plane point.

use super::enumerate::to_original;
use super::generator::helmert;
use super::{LatticeFamily, LatticePoint, LatticeSpec};

/// Margin under which a rounding decision counts as a tie and is handed to the
/// exhaustive search so the lexicographic tie rule applies.
const TIE: f64 = 1e-9;

pub fn closest_point(spec: &LatticeSpec, x: &[f64]) -> LatticePoint {
    assert_eq!(x.len(), spec.dimension());
    let fast = match spec.family() {
        LatticeFamily::Zn => zn_fast(spec, x),
        LatticeFamily::Dn => dn_fast(spec, x),
        LatticeFamily::An => an_fast(spec, x),
        _ => None,
    };
    match fast {
        Some(coeffs) => spec.point(coeffs),
        None => closest_point_search(spec, x),
    }
}

fn near_half(v: f64) -> bool {
    ((v - v.floor()) - 0.5).abs() < TIE
}

fn zn_fast(spec: &LatticeSpec, x: &[f64]) -> Option<Vec<i64>> {
    let xc = spec.to_canonical(x);
    if xc.iter().any(|&v| near_half(v)) {
        return None;
    }
    Some(xc.iter().map(|v| v.round() as i64).collect())
}

fn dn_fast(spec: &LatticeSpec, x: &[f64]) -> Option<Vec<i64>> {
    let xc = spec.to_canonical(x);
    if xc.iter().any(|&v| near_half(v)) {
        return None;
    }
    let mut p: Vec<i64> = xc.iter().map(|v| v.round() as i64).collect();
    if p.iter().sum::<i64>().rem_euclid(2) == 1 {
        let mut errs: Vec<(f64, usize)> = xc
            .iter()
            .zip(&p)
            .enumerate()
            .map(|(i, (v, r))| ((v - *r as f64).abs(), i))
            .collect();
        errs.sort_by(|a, b| b.0.total_cmp(&a.0));
        if errs.len() > 1 && errs[0].0 - errs[1].0 < TIE {
            return None;
        }
        let i = errs[0].1;
        p[i] += if xc[i] > p[i] as f64 { 1 } else { -1 };
    }
    Some(canonical_to_coeffs(spec, &p))
}

/// Solves `c·G = p` for an integer point `p` of the canonical lattice.
fn canonical_to_coeffs(spec: &LatticeSpec, p: &[i64]) -> Vec<i64> {
    let n = spec.dimension();
    let g = spec.generator();
    let pv = nalgebra::DVector::from_iterator(n, p.iter().map(|&v| v as f64));
    let c = g
        .transpose()
        .lu()
        .solve(&pv)
        .expect("generator is nonsingular");
    c.iter().map(|v| v.round() as i64).collect()
}

fn an_fast(spec: &LatticeSpec, x: &[f64]) -> Option<Vec<i64>> {
    let n = spec.dimension();
    let xc = spec.to_canonical(x);
    let h = helmert(n);
    // hyperplane coordinates y = xc · H
    let y: Vec<f64> = (0..=n)
        .map(|j| (0..n).map(|i| xc[i] * h[(i, j)]).sum())
        .collect();
    if y.iter().any(|&v| near_half(v)) {
        return None;
    }
    let mut f: Vec<i64> = y.iter().map(|v| v.round() as i64).collect();
    let deficiency: i64 = f.iter().sum();
    if deficiency != 0 {
        let mut order: Vec<(f64, usize)> = y
            .iter()
            .zip(&f)
            .enumerate()
            .map(|(i, (v, r))| (v - *r as f64, i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let k = deficiency.unsigned_abs() as usize;
        if deficiency > 0 {
            // lower the k coordinates that were rounded up the most
            if k < order.len() && order[k].0 - order[k - 1].0 < TIE {
                return None;
            }
            for &(_, i) in &order[..k] {
                f[i] -= 1;
            }
        } else {
            let m = order.len();
            if k < m && order[m - k].0 - order[m - k - 1].0 < TIE {
                return None;
            }
            for &(_, i) in &order[m - k..] {
                f[i] += 1;
            }
        }
    }
    // p = Σ c_i (e_i − e_{i+1}) gives c_i = p_0 + … + p_i
    let mut acc = 0;
    Some(
        f[..n]
            .iter()
            .map(|&v| {
                acc += v;
                acc
            })
            .collect(),
    )
}

/// Sphere decoder on the reduced basis, used for every family without a fast
/// path. Every point within a relative 1e−9 of
/// the best squared distance is kept; the lexicographically smallest
/// original-basis coefficient vector wins.
pub fn closest_point_search(spec: &LatticeSpec, x: &[f64]) -> LatticePoint {
    let tri = spec.triangular();
    let u = spec.unimodular();
    let reduced = spec.reduced_basis();
    let n = spec.dimension();
    let babai = tri.babai(x);
    let babai_d: f64 = (0..n)
        .map(|j| {
            let p: f64 = (0..n).map(|i| babai[i] as f64 * reduced[(i, j)]).sum();
            (p - x[j]).powi(2)
        })
        .sum();
    let slack = |d: f64| d * (1.0 + TIE) + 1e-15 * (1.0 + spec.scale() * spec.scale());
    let mut best = babai_d;
    let mut found: Vec<(Vec<i64>, f64)> = Vec::new();
    tri.search(x, slack(best), |z, d| {
        if d <= slack(best) {
            found.push((z.to_vec(), d));
        }
        if d < best {
            best = d;
        }
        slack(best)
    });
    let coeffs = found
        .into_iter()
        .filter(|(_, d)| *d <= slack(best))
        .map(|(z, _)| to_original(&z, u))
        .min()
        .unwrap_or_else(|| to_original(&babai, u));
    spec.point(coeffs)
}
