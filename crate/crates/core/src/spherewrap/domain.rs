//! Covers of the wrap domain by axis-aligned boxes.
//!
//! The domain is a tree: each band of a level fixes the interval of that
//! level's last coordinate and leaves the remaining coordinates to the level
//! below, shrunk by the band's factor. Walking the whole tree gives one box per
//! path, far too many in high dimension. Instead a subtree is replaced by its
//! bounding box as soon as that box is expected to hold few lattice points;
//! callers filter the enumerated points through the exact wrap map.

use std::f64::consts::PI;

use super::{level_bands, WrapParams};

#[derive(Clone, Debug)]
pub(crate) struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    pub fn half_widths(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (h - l))
            .collect()
    }

    #[cfg(test)]
    fn contains(&self, x: &[f64], tol: f64) -> bool {
        (0..x.len()).all(|j| x[j] >= self.lo[j] - tol && x[j] <= self.hi[j] + tol)
    }
}

/// Coordinates `m..` are fixed to intervals; coordinates `..m` range over a
/// level of dimension `m` with design distance `d` scaled by `sigma`.
struct Node {
    m: usize,
    d: f64,
    sigma: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// Per-coordinate bounds of a level: `(lower, upper)` for its `m` coordinates.
fn level_hull(m: usize, d: f64, ratio: f64, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    if m == 1 {
        return (vec![-PI * sigma], vec![(PI - d) * sigma]);
    }
    let bands = level_bands(d, ratio);
    let top = bands.last().map_or(0.0, |b| b.hi) * sigma;
    let rho = bands
        .iter()
        .filter_map(|b| b.sub.map(|s| s.rho))
        .fold(0.0, f64::max);
    let y = PI * sigma * rho;
    let mut lo = vec![-y; m];
    let mut hi = vec![y; m];
    lo[m - 1] = -top;
    hi[m - 1] = top;
    (lo, hi)
}

fn with_prefix(mut lo: Vec<f64>, mut hi: Vec<f64>, node: &Node) -> DomainBox {
    lo.extend_from_slice(&node.lo);
    hi.extend_from_slice(&node.hi);
    DomainBox { lo, hi }
}

fn zero_box(m: usize, node: &Node) -> DomainBox {
    with_prefix(vec![0.0; m], vec![0.0; m], node)
}

fn expand(
    mut stack: Vec<Node>,
    ratio: f64,
    estimate: &dyn Fn(&[f64]) -> f64,
    limit: f64,
) -> Vec<DomainBox> {
    let mut out = Vec::new();
    while let Some(node) = stack.pop() {
        let (lo, hi) = level_hull(node.m, node.d, ratio, node.sigma);
        let hull = with_prefix(lo, hi, &node);
        let bands: Vec<_> = level_bands(node.d, ratio)
            .into_iter()
            .filter(|b| b.sub.is_some())
            .collect();
        if node.m == 1 || bands.is_empty() || estimate(&hull.half_widths()) <= limit {
            out.push(hull);
            continue;
        }
        let m = node.m;
        // the pole and every band without a sub-level have y = 0
        let top = hull.hi[m - 1];
        let mut axis = zero_box(m, &node);
        axis.lo[m - 1] = -top;
        axis.hi[m - 1] = top;
        out.push(axis);
        for band in bands {
            let sub = band.sub.expect("filtered");
            // a level without bands holds only its pole, already in `axis`
            if sub.d > 0.0 && m > 2 && level_bands(sub.d, ratio).is_empty() {
                continue;
            }
            for (zlo, zhi) in [(band.lo, band.hi), (-band.hi, -band.lo)] {
                let mut lo = vec![zlo * node.sigma];
                let mut hi = vec![zhi * node.sigma];
                lo.extend_from_slice(&node.lo);
                hi.extend_from_slice(&node.hi);
                let child = Node {
                    m: m - 1,
                    d: sub.d,
                    sigma: node.sigma * sub.rho,
                    lo,
                    hi,
                };
                stack.push(child);
            }
        }
    }
    out
}

/// Boxes whose union contains every point [`super::wrap_point`] maps onto the
/// sphere. `estimate` gives the expected number of lattice points in a box
/// from its half-widths; subtrees expected to hold at most `limit` points are
/// covered by one box.
pub(crate) fn band_cover(
    params: &WrapParams,
    estimate: &dyn Fn(&[f64]) -> f64,
    limit: f64,
) -> Vec<DomainBox> {
    let root = Node {
        m: params.dim,
        d: params.d_s,
        sigma: 1.0,
        lo: Vec::new(),
        hi: Vec::new(),
    };
    expand(vec![root], params.ratio(), estimate, limit)
}

/// Boxes covering the top-level buffers (pole cap, gaps between bands and the
/// equator strip), each crossed with the longitude domain of the band below
/// it, as used by [`super::buffer_image`].
pub(crate) fn buffer_cover(
    params: &WrapParams,
    estimate: &dyn Fn(&[f64]) -> f64,
    limit: f64,
) -> Vec<DomainBox> {
    let m = params.dim;
    if m == 1 {
        return Vec::new();
    }
    let d = params.d_s;
    let ratio = params.ratio();
    let bands = level_bands(d, ratio);
    let Some(first) = bands.first() else {
        return Vec::new();
    };
    let mut strips = vec![(0.0, first.lo, 0)];
    for (i, b) in bands.iter().enumerate() {
        let upper = bands
            .get(i + 1)
            .map_or(std::f64::consts::FRAC_PI_2, |n| n.lo);
        if upper > b.hi {
            strips.push((b.hi, upper, i));
        }
    }
    let mut stack = Vec::new();
    let mut out = Vec::new();
    for (zlo, zhi, i) in strips {
        for (a, b) in [(zlo, zhi), (-zhi, -zlo)] {
            let node = Node {
                m: m - 1,
                d: bands[i].sub.map_or(0.0, |s| s.d),
                sigma: bands[i].sub.map_or(0.0, |s| s.rho),
                lo: vec![a],
                hi: vec![b],
            };
            match bands[i].sub {
                Some(_) => stack.push(node),
                None => out.push(zero_box(m - 1, &node)),
            }
        }
    }
    out.extend(expand(stack, ratio, estimate, limit));
    out
}
