//! Construction of a wrapped spherical code from a scaled lattice.

use std::collections::{BTreeMap, HashMap};

use kdtree::distance::squared_euclidean;
use kdtree::KdTree;
use serde::{Deserialize, Serialize};

use super::domain::{band_cover, buffer_cover, DomainBox};
use super::{
    buffer_image, chord, geodesic, top_band_of, wrap_point, WrapError, WrapParams, Wrapped,
};
use crate::lattice::{BoxEnumerator, LatticePoint, LatticeSpec, DEFAULT_BOX_CAP};
use crate::par::{self, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hemisphere {
    North,
    South,
}

/// Where a code point came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    NorthPole,
    SouthPole,
    Band {
        hemisphere: Hemisphere,
        band: usize,
        point: LatticePoint,
    },
    Reclaimed(LatticePoint),
}

impl Provenance {
    pub fn lattice_point(&self) -> Option<&LatticePoint> {
        match self {
            Provenance::Band { point, .. } | Provenance::Reclaimed(point) => Some(point),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub exec: Execution,
    pub reclaim: bool,
    pub box_cap: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            exec: Execution::Auto,
            reclaim: true,
            box_cap: DEFAULT_BOX_CAP,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SphericalCode {
    pub params: WrapParams,
    pub points: Vec<Vec<f64>>,
    pub provenance: Vec<Provenance>,
    /// Smallest pairwise geodesic distance, checked over all pairs.
    pub min_distance: f64,
    /// Buffer points examined by the reclamation pass and how many were kept.
    pub buffer_candidates: usize,
    pub reclaimed: usize,
    lookup: HashMap<Vec<i64>, usize>,
}

impl SphericalCode {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d_s(&self) -> f64 {
        self.params.d_s
    }

    /// Index of the code point built from the lattice point with these
    /// coefficients (the origin is the north pole).
    pub fn index_of(&self, coeffs: &[i64]) -> Option<usize> {
        self.lookup.get(coeffs).copied()
    }

    pub fn south_pole(&self) -> Option<usize> {
        self.provenance
            .iter()
            .position(|p| *p == Provenance::SouthPole)
    }

    pub fn north_pole(&self) -> Option<usize> {
        self.provenance
            .iter()
            .position(|p| *p == Provenance::NorthPole)
    }

    /// Keeps the first `n` points in index order.
    pub fn truncated(&self, n: usize) -> SphericalCode {
        let n = n.min(self.len());
        let points = self.points[..n].to_vec();
        let provenance = self.provenance[..n].to_vec();
        let min_distance = min_pairwise_distance(&points);
        let reclaimed = provenance
            .iter()
            .filter(|p| matches!(p, Provenance::Reclaimed(_)))
            .count();
        SphericalCode::assemble(
            self.params,
            points,
            provenance,
            min_distance,
            self.buffer_candidates,
            reclaimed,
        )
    }

    fn assemble(
        params: WrapParams,
        points: Vec<Vec<f64>>,
        provenance: Vec<Provenance>,
        min_distance: f64,
        buffer_candidates: usize,
        reclaimed: usize,
    ) -> Self {
        let lookup = provenance
            .iter()
            .enumerate()
            .filter_map(|(i, p)| match p {
                Provenance::NorthPole => Some((vec![0; params.dim], i)),
                other => other.lattice_point().map(|lp| (lp.coeffs.clone(), i)),
            })
            .collect();
        SphericalCode {
            params,
            points,
            provenance,
            min_distance,
            buffer_candidates,
            reclaimed,
            lookup,
        }
    }
}

/// Subtrees of the domain expected to hold at most this many lattice points
/// are enumerated as one bounding box.
const COVER_LIMIT: f64 = 24.0;

#[derive(Clone, Copy)]
enum Region {
    Bands,
    Buffers,
}

fn enumerate_region(
    spec: &LatticeSpec,
    params: &WrapParams,
    region: Region,
    opts: &BuildOptions,
) -> Result<BTreeMap<Vec<i64>, LatticePoint>, WrapError> {
    let mut en = BoxEnumerator::new(spec);
    en.cap = opts.box_cap;
    let estimate = |h: &[f64]| en.estimate(h);
    let boxes = match region {
        Region::Bands => band_cover(params, &estimate, COVER_LIMIT),
        Region::Buffers => buffer_cover(params, &estimate, COVER_LIMIT),
    };
    // Mirrored boxes share a shape, so each distinct shape is reduced once.
    let mut shapes: BTreeMap<Vec<u64>, Vec<&DomainBox>> = BTreeMap::new();
    for b in &boxes {
        let key = b.half_widths().iter().map(|h| h.to_bits()).collect();
        shapes.entry(key).or_default().push(b);
    }
    let groups: Vec<Vec<&DomainBox>> = shapes.into_values().collect();
    let found = par::map_collect(opts.exec, &groups, |group| {
        let prepared = en.prepare(&group[0].half_widths())?;
        Ok(group
            .iter()
            .flat_map(|b| en.points(&prepared, &b.center()))
            .collect::<Vec<_>>())
    });
    let mut all = BTreeMap::new();
    for pts in found {
        for p in pts.map_err(WrapError::Lattice)? {
            all.entry(p.coeffs.clone()).or_insert(p);
        }
    }
    Ok(all)
}

fn tree_of(points: &[Vec<f64>]) -> KdTree<f64, usize, Vec<f64>> {
    let dims = points.first().map_or(1, |p| p.len());
    let mut tree = KdTree::new(dims);
    for (i, p) in points.iter().enumerate() {
        tree.add(p.clone(), i).expect("finite coordinates");
    }
    tree
}

/// Exact minimal pairwise geodesic distance (π for fewer than two points).
pub(crate) fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    if points.len() < 2 {
        return std::f64::consts::PI;
    }
    let tree = tree_of(points);
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            tree.nearest(p, 2, &squared_euclidean)
                .expect("finite coordinates")
                .into_iter()
                .filter(|(_, j)| **j != i)
                .map(|(d2, _)| 2.0 * (0.5 * d2.sqrt()).min(1.0).asin())
                .fold(std::f64::consts::PI, f64::min)
        })
        .fold(std::f64::consts::PI, f64::min)
}

pub fn build_code(spec: &LatticeSpec, params: &WrapParams) -> Result<SphericalCode, WrapError> {
    build_code_with(spec, params, &BuildOptions::default())
}

/// Enumerates the lattice over the wrap domain, wraps every point, adds both
/// poles, greedily reclaims buffer points that keep the design distance, and
/// verifies the minimal distance over all pairs.
///
/// Points are ordered by lattice coefficients (the north pole is the origin),
/// with the south pole last.
pub fn build_code_with(
    spec: &LatticeSpec,
    params: &WrapParams,
    opts: &BuildOptions,
) -> Result<SphericalCode, WrapError> {
    if spec.dimension() != params.dim {
        return Err(WrapError::DimensionMismatch {
            lattice: spec.dimension(),
            sphere: params.dim,
        });
    }
    let dim = params.dim;
    let d_s = params.d_s;

    let band_points = enumerate_region(spec, params, Region::Bands, opts)?;
    let classified = par::map_collect(opts.exec, &band_points.values().collect::<Vec<_>>(), |p| {
        (
            wrap_point(params, &p.embedding),
            top_band_of(params, &p.embedding),
        )
    });

    let mut entries: Vec<(Vec<i64>, Vec<f64>, Provenance)> = Vec::new();
    // On the circle the origin is an ordinary point; higher dimensions add it
    // as the north pole and append the south pole.
    if dim > 1 {
        let mut north = vec![0.0; dim + 1];
        north[dim] = 1.0;
        entries.push((vec![0; dim], north, Provenance::NorthPole));
    }
    for (p, (w, band)) in band_points.values().zip(classified) {
        if p.coeffs.iter().all(|&c| c == 0) && dim > 1 {
            continue;
        }
        if let Wrapped::Point(q) = w {
            let prov = match band {
                Some((south, band)) => Provenance::Band {
                    hemisphere: if south {
                        Hemisphere::South
                    } else {
                        Hemisphere::North
                    },
                    band,
                    point: p.clone(),
                },
                None => Provenance::Band {
                    hemisphere: Hemisphere::North,
                    band: 0,
                    point: p.clone(),
                },
            };
            entries.push((p.coeffs.clone(), q, prov));
        }
    }
    let mut points: Vec<Vec<f64>> = entries.iter().map(|e| e.1.clone()).collect();
    if dim > 1 {
        let mut south = vec![0.0; dim + 1];
        south[dim] = -1.0;
        points.push(south);
    }

    let mut buffer_candidates = 0;
    let mut reclaimed = 0;
    if opts.reclaim && dim > 1 {
        let candidates = enumerate_region(spec, params, Region::Buffers, opts)?;
        let images: Vec<Option<Vec<f64>>> =
            par::map_collect(opts.exec, &candidates.values().collect::<Vec<_>>(), |p| {
                match wrap_point(params, &p.embedding) {
                    Wrapped::InBuffer => buffer_image(params, &p.embedding),
                    _ => None,
                }
            });
        let mut pool: Vec<(f64, &LatticePoint, Vec<f64>)> = {
            let tree = tree_of(&points);
            candidates
                .values()
                .zip(images)
                .filter_map(|(p, img)| img.map(|q| (p, q)))
                .map(|(p, q)| {
                    let (d2, _) = tree.nearest(&q, 1, &squared_euclidean).expect("finite")[0];
                    (2.0 * (0.5 * d2.sqrt()).min(1.0).asin(), p, q)
                })
                .collect()
        };
        buffer_candidates = pool.len();
        // farthest from the code first; ties by coefficients
        pool.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then_with(|| a.1.coeffs.cmp(&b.1.coeffs))
        });
        let mut tree = tree_of(&points);
        let mut next = points.len();
        let threshold = chord(d_s);
        for (dist, p, q) in pool {
            if dist < d_s {
                continue;
            }
            let near = tree
                .within(
                    &q,
                    threshold * threshold * (1.0 - 1e-12),
                    &squared_euclidean,
                )
                .expect("finite");
            if near.iter().all(|(_, &j)| geodesic(&points[j], &q) >= d_s) {
                tree.add(q.clone(), next).expect("finite");
                points.push(q.clone());
                next += 1;
                entries.push((p.coeffs.clone(), q, Provenance::Reclaimed(p.clone())));
                reclaimed += 1;
            }
        }
    }

    // final order: by coefficients, south pole last
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(entries.len() + 1);
    let mut provenance = Vec::with_capacity(entries.len() + 1);
    for (_, q, prov) in entries {
        points.push(q);
        provenance.push(prov);
    }
    if dim > 1 {
        let mut south = vec![0.0; dim + 1];
        south[dim] = -1.0;
        points.push(south);
        provenance.push(Provenance::SouthPole);
    }
    if points.is_empty() {
        return Err(WrapError::EmptyCode);
    }
    let min_distance = min_pairwise_distance(&points);
    if points.len() > 1 && min_distance < d_s - 1e-9 {
        return Err(WrapError::DistanceViolation {
            found: min_distance,
            required: d_s,
        });
    }
    Ok(SphericalCode::assemble(
        *params,
        points,
        provenance,
        min_distance,
        buffer_candidates,
        reclaimed,
    ))
}
