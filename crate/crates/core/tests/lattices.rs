use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfc_core::lattice::*;

fn spec(f: LatticeFamily, n: usize) -> LatticeSpec {
    LatticeSpec::new(f, n).unwrap()
}

/// Smallest nonzero norm over all coefficient vectors in {-1,0,1}^n.
fn cube_min_norm(g: &sfc_core::linalg::RMat) -> f64 {
    let n = g.nrows();
    let total = 3usize.pow(n as u32);
    let mut best = f64::INFINITY;
    let mut v = vec![0.0; n];
    for idx in 1..total {
        v.iter_mut().for_each(|x| *x = 0.0);
        let mut k = idx;
        for i in 0..n {
            let c = (k % 3) as f64 - 1.0;
            k /= 3;
            if c != 0.0 {
                for j in 0..n {
                    v[j] += c * g[(i, j)];
                }
            }
        }
        let nrm: f64 = v.iter().map(|x| x * x).sum();
        if nrm > 1e-12 {
            best = best.min(nrm);
        }
    }
    best.sqrt()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

#[test]
fn cubic_lattice_is_identity() {
    let z = spec(LatticeFamily::Zn, 12);
    assert_eq!(*z.generator(), sfc_core::linalg::RMat::identity(12, 12));
    assert!((z.generator_det() - 1.0).abs() < 1e-12);
    assert!((minimal_distance(&z) - 1.0).abs() < 1e-12);
}

#[test]
fn d12_generator_determinant_and_minimum() {
    let d = spec(LatticeFamily::Dn, 12);
    assert!((d.generator_det() - 2.0).abs() < 1e-9);
    // D_n is an even integral lattice, so the cube search gives the minimum.
    let oracle = cube_min_norm(d.generator());
    assert!((oracle - 2f64.sqrt()).abs() < 1e-12);
    assert!((minimal_distance(&d) - oracle).abs() < 1e-12);
}

#[test]
fn k12_generator_determinant_minimum_and_kissing_number() {
    let k = spec(LatticeFamily::K12, 12);
    assert!(
        (k.gram_det() - 729.0).abs() < 1e-6,
        "gram det {}",
        k.gram_det()
    );
    let g = k.generator();
    let gram = g * g.transpose();
    // norms are integral after scaling by 2 with a minimum of 4
    let oracle = cube_min_norm(g);
    assert!((oracle - 2.0).abs() < 1e-12, "cube oracle {oracle}");
    assert!((minimal_distance(&k) - 2.0).abs() < 1e-12);
    for i in 0..12 {
        assert!((gram[(i, i)] * 2.0 - (gram[(i, i)] * 2.0).round()).abs() < 1e-9);
    }
    assert_eq!(k.short_vectors(2.0 + 1e-9).len(), 756);
}

#[test]
fn exceptional_lattices() {
    let e8 = spec(LatticeFamily::E8, 8);
    assert!((e8.gram_det() - 1.0).abs() < 1e-9);
    assert!((minimal_distance(&e8) - 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(e8.short_vectors(2f64.sqrt() + 1e-9).len(), 240);

    let bw = spec(LatticeFamily::BW16, 16);
    assert!((bw.gram_det() - 256.0).abs() < 1e-6);
    assert!((minimal_distance(&bw) - 2.0).abs() < 1e-12);
    assert_eq!(bw.short_vectors(2.0 + 1e-9).len(), 4320);

    let leech = spec(LatticeFamily::Leech24, 24);
    assert!((leech.gram_det() - 1.0).abs() < 1e-6);
    assert!((minimal_distance(&leech) - 2.0).abs() < 1e-12);
}

#[test]
fn root_lattice_duals_and_a12() {
    let a = spec(LatticeFamily::An, 12);
    assert!((minimal_distance(&a) - 2f64.sqrt()).abs() < 1e-12);
    assert!((a.gram_det() - 13.0).abs() < 1e-8);
    let a_dual = spec(LatticeFamily::AnDual, 12);
    assert!((minimal_distance(&a_dual) - (12.0f64 / 13.0).sqrt()).abs() < 1e-12);
    let d_dual = spec(LatticeFamily::DnDual, 12);
    assert!((minimal_distance(&d_dual) - 1.0).abs() < 1e-12);
    assert!((d_dual.gram_det() - 0.25).abs() < 1e-12);
}

#[test]
fn design_distance_scaling() {
    let z = spec(LatticeFamily::Zn, 12);
    assert!((scale_to_design_distance(&z, 0.5).scale() - 0.5).abs() < 1e-15);
    let d = spec(LatticeFamily::Dn, 12);
    let scaled = scale_to_design_distance(&d, 0.5);
    assert!((scaled.scale() - 0.5 / 2f64.sqrt()).abs() < 1e-12);
    assert!((minimal_distance(&scaled) - 0.5).abs() < 1e-9 * 0.5);
    let k = spec(LatticeFamily::K12, 12);
    assert!((scale_to_design_distance(&k, 2.0).scale() - 1.0).abs() < 1e-12);
    let a = scale_to_design_distance(&spec(LatticeFamily::An, 12), 0.3);
    assert!((minimal_distance(&a) - 0.3).abs() < 1e-9 * 0.3);
    assert!((minimal_distance(&a) - 2f64.sqrt() * a.scale()).abs() < 1e-12);
}

#[test]
fn rotation_preserves_minimal_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for f in [LatticeFamily::K12, LatticeFamily::Dn] {
        let base = scale_to_design_distance(&spec(f, 12), 0.2);
        let d0 = minimal_distance(&base);
        for _ in 0..10 {
            let alpha = rng.random_range(-3.2..3.2);
            let rotated = base.with_rotation(alpha);
            assert!((minimal_distance(&rotated) - d0).abs() < 1e-9);
        }
    }
}

#[test]
fn embedding_is_reproducible_from_coefficients() {
    let k = scale_to_design_distance(&spec(LatticeFamily::K12, 12), 0.3)
        .with_rotation(std::f64::consts::FRAC_PI_2);
    let c: Vec<i64> = (0..12).map(|i| (i as i64 % 5) - 2).collect();
    let p = k.point(c.clone());
    let g = k.generator();
    let r = k.rotation();
    for j in 0..12 {
        let mut x = 0.0;
        for l in 0..12 {
            let cg: f64 = (0..12).map(|i| c[i] as f64 * g[(i, l)]).sum();
            x += cg * r[(j, l)];
        }
        assert!((p.embedding[j] - k.scale() * x).abs() < 1e-12);
    }
}

#[test]
fn z12_small_box_holds_only_the_origin() {
    let z = spec(LatticeFamily::Zn, 12);
    let pts = enumerate_in_box(&z, &[-0.4; 12], &[0.4; 12]).unwrap();
    assert_eq!(pts.len(), 1);
    assert!(pts[0].coeffs.iter().all(|&c| c == 0));
}

#[test]
fn d12_box_matches_canonical_brute_force() {
    let d = spec(LatticeFamily::Dn, 12);
    let found: BTreeSet<Vec<i64>> = enumerate_in_box(&d, &[-1.5; 12], &[1.5; 12])
        .unwrap()
        .into_iter()
        .map(|p| p.embedding.iter().map(|x| x.round() as i64).collect())
        .collect();
    // D12 = integer vectors with even coordinate sum; the box allows {-1,0,1}.
    let mut oracle = BTreeSet::new();
    for idx in 0..3usize.pow(12) {
        let mut k = idx;
        let v: Vec<i64> = (0..12)
            .map(|_| {
                let c = (k % 3) as i64 - 1;
                k /= 3;
                c
            })
            .collect();
        if v.iter().sum::<i64>().rem_euclid(2) == 0 {
            oracle.insert(v);
        }
    }
    assert_eq!(found.len(), oracle.len());
    assert_eq!(found, oracle);
}

#[test]
fn rotated_box_matches_coefficient_brute_force() {
    // D3 rotated: every point with coefficients in [-4,4]^3 inside the box.
    let d = spec(LatticeFamily::Dn, 3).with_rotation(0.7);
    let lo = [-1.3, -0.9, -2.1];
    let hi = [1.7, 1.1, 0.4];
    let got: BTreeSet<Vec<i64>> = enumerate_in_box(&d, &lo, &hi)
        .unwrap()
        .into_iter()
        .map(|p| p.coeffs)
        .collect();
    let mut oracle = BTreeSet::new();
    for a in -6..=6 {
        for b in -6..=6 {
            for c in -6..=6 {
                let e = d.embed(&[a, b, c]);
                if (0..3).all(|j| e[j] >= lo[j] && e[j] <= hi[j]) {
                    oracle.insert(vec![a, b, c]);
                }
            }
        }
    }
    assert!(!oracle.is_empty());
    assert_eq!(got, oracle);
}

#[test]
fn cvp_ties_and_trivial_cases() {
    let z = spec(LatticeFamily::Zn, 12);
    let mut x = vec![0.0; 12];
    x[0] = 0.4;
    assert!(closest_point(&z, &x).coeffs.iter().all(|&c| c == 0));
    x[0] = 0.5;
    assert!(closest_point(&z, &x).coeffs.iter().all(|&c| c == 0));
    x[0] = -0.5;
    assert_eq!(closest_point(&z, &x).coeffs[0], -1);
}

/// Exhaustive check: no lattice point in the cube of half-width
/// ‖x − p‖ around x is strictly closer than p, and p has the smallest
/// coefficients among ties.
fn assert_closest(spec: &LatticeSpec, x: &[f64], p: &LatticePoint) {
    let d = dist2(x, &p.embedding);
    let r = d.sqrt() + 1e-9;
    let lo: Vec<f64> = x.iter().map(|v| v - r).collect();
    let hi: Vec<f64> = x.iter().map(|v| v + r).collect();
    let pts = enumerate_in_box(spec, &lo, &hi).unwrap();
    let best = pts
        .iter()
        .map(|q| (dist2(x, &q.embedding), q.coeffs.clone()))
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .unwrap();
    assert!(best.0 >= d - 1e-9 * (1.0 + d), "closer point exists");
    if (best.0 - d).abs() <= 1e-12 {
        assert_eq!(best.1, p.coeffs);
    }
}

#[test]
fn k12_cvp_matches_exhaustive_search() {
    let k = spec(LatticeFamily::K12, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let c: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..1.0)).collect();
        let x: Vec<f64> = (0..12)
            .map(|j| (0..12).map(|i| c[i] * k.basis()[(i, j)]).sum())
            .collect();
        let p = closest_point(&k, &x);
        assert_closest(&k, &x, &p);
    }
}

#[test]
fn cvp_matches_exhaustive_search_per_family() {
    // K12 has its own exhaustive test above; 12-dimensional boxes around
    // every target are too slow to repeat a thousand times per family.
    let cases = [
        (LatticeFamily::Zn, 6),
        (LatticeFamily::Dn, 6),
        (LatticeFamily::An, 6),
        (LatticeFamily::AnDual, 6),
        (LatticeFamily::DnDual, 6),
        (LatticeFamily::E8, 8),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (f, n) in cases {
        let s = spec(f, n).with_rotation(0.4);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let p = closest_point(&s, &x);
            assert_closest(&s, &x, &p);
        }
    }
}

#[test]
fn fast_paths_agree_with_sphere_decoder() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for f in [LatticeFamily::Zn, LatticeFamily::Dn, LatticeFamily::An] {
        for (n, alpha) in [(12, 0.0), (12, 1.1), (5, 0.0)] {
            let s = scale_to_design_distance(&spec(f, n), 0.37).with_rotation(alpha);
            for _ in 0..1000 {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
                assert_eq!(
                    closest_point(&s, &x).coeffs,
                    closest_point_search(&s, &x).coeffs,
                    "{f} n={n}"
                );
            }
        }
    }
}

#[test]
fn cvp_is_deterministic() {
    let k = spec(LatticeFamily::K12, 12).with_rotation(0.9);
    let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
    assert_eq!(closest_point(&k, &x), closest_point(&k, &x));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closest_point_beats_its_neighbours(xs in prop::collection::vec(-4.0f64..4.0, 12), alpha in -3.0f64..3.0) {
        let k = spec(LatticeFamily::K12, 12).with_rotation(alpha);
        let p = closest_point(&k, &xs);
        let d = dist2(&xs, &p.embedding);
        for v in k.short_vectors(2.0 + 1e-9) {
            let q: Vec<f64> = p.embedding.iter().zip(&v.embedding).map(|(a, b)| a + b).collect();
            prop_assert!(dist2(&xs, &q) >= d - 1e-9);
        }
    }

    #[test]
    fn lattice_points_round_to_themselves(c in prop::collection::vec(-5i64..5, 12), alpha in -3.0f64..3.0) {
        for f in [LatticeFamily::Zn, LatticeFamily::Dn, LatticeFamily::An, LatticeFamily::K12] {
            let s = scale_to_design_distance(&spec(f, 12), 0.25).with_rotation(alpha);
            let p = s.point(c.clone());
            prop_assert_eq!(closest_point(&s, &p.embedding).coeffs, c.clone());
        }
    }
}
