//! Deterministic generators for the domain families.
//!
//! Disk-like domains use a ring ("polar") triangulation: concentric rings of
//! vertices, each with a node at angle zero, stitched together by merging the
//! angular sequences of neighbouring rings. Rings are graded towards the
//! origin so that every dyadic radius `2^-k` is a ring; a slit along the
//! positive `x1` axis then lies on mesh edges for any dyadic tip, and all
//! members of the dyadic cracked-disk family share one vertex geometry.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{holdall_radius_for, BoundaryEdge, BoundaryTag, Mesh, Point};
use crate::error::{Error, Result};

/// Ratio between local mesh size and distance to the origin near the centre.
const GRADING: f64 = 0.5;

/// Half length of the dumbbell handle.
pub const DUMBBELL_HANDLE_HALF_LENGTH: f64 = 0.25;

/// Smallest admissible positive crack-tip abscissa.
const MIN_TIP: f64 = 1e-4;

fn local_size(h: f64, r: f64) -> f64 {
    h.min(GRADING * r)
}

fn graded_radii(h: f64, tip: Option<f64>) -> Vec<f64> {
    let mut levels = (1.0 / h).log2().ceil() as i32 + 4;
    if let Some(d) = tip.filter(|&d| d > 0.0) {
        levels = levels.max((1.0 / d).log2().ceil() as i32 + 2);
    }
    let mut radii = vec![2f64.powi(-levels)];
    for k in (0..levels).rev() {
        let lo = 2f64.powi(-(k + 1));
        let hi = 2f64.powi(-k);
        let m = ((hi - lo) / local_size(h, lo)).ceil().max(1.0) as usize;
        for i in 1..=m {
            radii.push(if i == m {
                hi
            } else {
                lo + (hi - lo) * i as f64 / m as f64
            });
        }
    }
    if let Some(d) = tip.filter(|&d| d > 0.0) {
        if !radii.iter().any(|&r| (r - d).abs() <= 1e-12) {
            let gap = 0.3 * local_size(h, d);
            radii.retain(|&r| r == 1.0 || (r - d).abs() > gap);
            radii.push(d);
            radii.sort_by(|a, b| a.total_cmp(b));
        } else {
            for r in radii.iter_mut() {
                if (*r - d).abs() <= 1e-12 {
                    *r = d;
                }
            }
        }
    }
    radii
}

struct Ring {
    /// Vertex ids for angles `2πj/n`, `j = 0..n`, plus the vertex closing the
    /// ring at angle `2π` (a lower-lip copy for cracked rings).
    seq: Vec<usize>,
    angles: Vec<f64>,
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    seams: Vec<(usize, usize)>,
}

impl Builder {
    fn vertex(&mut self, p: Point) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    fn ring(&mut self, r: f64, n: usize, cracked: bool) -> Ring {
        let mut seq = Vec::with_capacity(n + 1);
        let mut angles = Vec::with_capacity(n + 1);
        for j in 0..n {
            let a = 2.0 * PI * j as f64 / n as f64;
            let p = if j == 0 { [r, 0.0] } else { [r * a.cos(), r * a.sin()] };
            seq.push(self.vertex(p));
            angles.push(a);
        }
        let closing = if cracked {
            let lower = self.vertex([r, 0.0]);
            self.seams.push((seq[0], lower));
            lower
        } else {
            seq[0]
        };
        seq.push(closing);
        angles.push(2.0 * PI);
        Ring { seq, angles }
    }

    /// Triangulates the strip between two rings by merging their angular
    /// sequences.
    fn stitch(&mut self, inner: &Ring, outer: &Ring) {
        let (p, q) = (inner.seq.len() - 1, outer.seq.len() - 1);
        let (mut i, mut j) = (0, 0);
        while i < p || j < q {
            let advance_outer = i == p || (j < q && outer.angles[j + 1] < inner.angles[i + 1]);
            if advance_outer {
                self.triangles
                    .push([inner.seq[i], outer.seq[j], outer.seq[j + 1]]);
                j += 1;
            } else {
                self.triangles
                    .push([inner.seq[i], outer.seq[j], inner.seq[i + 1]]);
                i += 1;
            }
        }
    }

    fn fan(&mut self, centre: usize, ring: &Ring) {
        for w in ring.seq.windows(2) {
            self.triangles.push([centre, w[0], w[1]]);
        }
    }

    fn ring_boundary(&mut self, ring: &Ring, tag: BoundaryTag) {
        for w in ring.seq.windows(2) {
            self.boundary.push(BoundaryEdge {
                a: w[0],
                b: w[1],
                tag,
            });
        }
    }

    fn finish(self) -> Result<Mesh> {
        let radius = holdall_radius_for(&self.vertices);
        Mesh::new(
            self.vertices,
            self.triangles,
            self.boundary,
            self.seams,
            radius,
        )
    }
}

fn ring_count(r: f64, size: f64) -> usize {
    (2 * (PI * r / size).ceil() as usize).max(8)
}

/// Unit disk with a slit `{(x1, 0) : slit_from <= x1 < 1}` when `slit_from`
/// is given, or the full unit disk otherwise.
fn polar_disk(h: f64, slit_from: Option<f64>) -> Result<Mesh> {
    let radii = graded_radii(h, slit_from);
    let mut b = Builder::default();
    let centre = b.vertex([0.0, 0.0]);
    let cracked = |r: f64| slit_from.is_some_and(|d| r > d + 1e-12);
    let rings: Vec<Ring> = radii
        .iter()
        .map(|&r| {
            let n = ring_count(r, local_size(h, r));
            b.ring(r, n, cracked(r))
        })
        .collect();
    b.fan(centre, &rings[0]);
    for w in rings.windows(2) {
        b.stitch(&w[0], &w[1]);
    }
    b.ring_boundary(rings.last().expect("at least one ring"), BoundaryTag::Outer);
    if let Some(d) = slit_from {
        // Walk outwards along angle zero from the tip.
        let (mut upper, mut lower) = if d == 0.0 {
            (centre, centre)
        } else {
            let k = radii
                .iter()
                .position(|&r| r == d)
                .expect("tip radius is a ring");
            (rings[k].seq[0], rings[k].seq[0])
        };
        for (ring, &r) in rings.iter().zip(&radii) {
            if !cracked(r) {
                continue;
            }
            let (u, l) = (ring.seq[0], *ring.seq.last().unwrap());
            b.boundary.push(BoundaryEdge {
                a: upper,
                b: u,
                tag: BoundaryTag::CrackUpper,
            });
            b.boundary.push(BoundaryEdge {
                a: lower,
                b: l,
                tag: BoundaryTag::CrackLower,
            });
            upper = u;
            lower = l;
        }
    }
    b.finish()
}

/// Unit disk slit along `{(x1, 0) : delta <= x1 < 1}`; `delta = 0` gives the
/// limit domain of the family, slit from the centre.
///
/// The mesh is graded towards the origin so that the local size at the tip
/// never exceeds `delta / 2`; `h` controls the size away from the centre.
pub fn generate_cracked_disk(delta: f64, h: f64) -> Result<Mesh> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(format!(
            "crack tip delta must satisfy 0 <= delta < 1, got {delta}"
        )));
    }
    if delta > 0.0 && delta < MIN_TIP {
        return Err(Error::invalid(format!(
            "crack tip delta = {delta} is below the resolvable minimum {MIN_TIP}"
        )));
    }
    if !(h > 0.0 && h <= 0.125) {
        return Err(Error::invalid(format!(
            "mesh size h must satisfy 0 < h <= 1/8 to resolve the slit tip, got {h}"
        )));
    }
    polar_disk(h, Some(delta))
}

/// Unit disk without slit, graded like the cracked-disk family.
pub fn generate_disk(h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h <= 0.125) {
        return Err(Error::invalid(format!(
            "mesh size h must satisfy 0 < h <= 1/8, got {h}"
        )));
    }
    polar_disk(h, None)
}

/// Unit disk minus the closed ball of the given radius about the origin.
pub fn generate_fixed_hole(radius: f64, h: f64) -> Result<Mesh> {
    if !(radius > 0.0 && radius < 0.5) {
        return Err(Error::invalid(format!(
            "hole radius must satisfy 0 < radius < 1/2, got {radius}"
        )));
    }
    if !(h > 0.0 && h <= 0.125 && h <= radius) {
        return Err(Error::invalid(format!(
            "mesh size h must satisfy 0 < h <= min(1/8, radius), got {h}"
        )));
    }
    let m = ((1.0 - radius) / h).ceil() as usize;
    let mut b = Builder::default();
    let rings: Vec<Ring> = (0..=m)
        .map(|i| {
            let r = if i == m {
                1.0
            } else {
                radius + (1.0 - radius) * i as f64 / m as f64
            };
            b.ring(r, ring_count(r, h), false)
        })
        .collect();
    for w in rings.windows(2) {
        b.stitch(&w[0], &w[1]);
    }
    b.ring_boundary(&rings[0], BoundaryTag::Hole);
    // The hole is traversed clockwise as seen from the domain; flip it so
    // every boundary edge keeps the domain on its left.
    for e in b.boundary.iter_mut() {
        std::mem::swap(&mut e.a, &mut e.b);
    }
    b.ring_boundary(rings.last().unwrap(), BoundaryTag::Outer);
    b.finish()
}

fn subdivide(breaks: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![breaks[0]];
    for w in breaks.windows(2) {
        let m = ((w[1] - w[0]) / h - 1e-9).ceil().max(1.0) as usize;
        for i in 1..=m {
            out.push(if i == m {
                w[1]
            } else {
                w[0] + (w[1] - w[0]) * i as f64 / m as f64
            });
        }
    }
    out
}

/// Structured triangulation of the tensor grid cells accepted by `keep`
/// (evaluated at cell centres). Every boundary edge is tagged outer.
fn grid_mesh(xs: &[f64], ys: &[f64], keep: impl Fn(f64, f64) -> bool) -> Result<Mesh> {
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut b = Builder::default();
    let mut id = |b: &mut Builder, i: usize, j: usize| -> usize {
        *ids.entry((i, j)).or_insert_with(|| b.vertex([xs[i], ys[j]]))
    };
    for j in 0..ys.len() - 1 {
        for i in 0..xs.len() - 1 {
            let (cx, cy) = (0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
            if !keep(cx, cy) {
                continue;
            }
            let v00 = id(&mut b, i, j);
            let v10 = id(&mut b, i + 1, j);
            let v11 = id(&mut b, i + 1, j + 1);
            let v01 = id(&mut b, i, j + 1);
            b.triangles.push([v00, v10, v11]);
            b.triangles.push([v00, v11, v01]);
        }
    }
    let mut count: HashMap<(usize, usize), (usize, usize, usize)> = HashMap::new();
    for tri in &b.triangles {
        for k in 0..3 {
            let (a, c) = (tri[k], tri[(k + 1) % 3]);
            count.entry((a.min(c), a.max(c))).or_insert((a, c, 0)).2 += 1;
        }
    }
    let mut edges: Vec<(usize, usize)> = count
        .values()
        .filter(|e| e.2 == 1)
        .map(|e| (e.0, e.1))
        .collect();
    edges.sort_unstable();
    b.boundary = edges
        .into_iter()
        .map(|(a, c)| BoundaryEdge {
            a,
            b: c,
            tag: BoundaryTag::Outer,
        })
        .collect();
    b.finish()
}

/// Unit square `[0, 1]^2` on a uniform grid with spacing at most `h`.
pub fn generate_unit_square(h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h <= 0.5) {
        return Err(Error::invalid(format!(
            "mesh size h must satisfy 0 < h <= 1/2, got {h}"
        )));
    }
    let g = subdivide(&[0.0, 1.0], h);
    grid_mesh(&g, &g, |_, _| true)
}

/// Rectangle `[0, width] x [0, height]` with spacings at most `hx`, `hy`.
pub fn generate_rectangle(width: f64, height: f64, hx: f64, hy: f64) -> Result<Mesh> {
    if !(width > 0.0 && height > 0.0 && hx > 0.0 && hy > 0.0) {
        return Err(Error::invalid("rectangle sides and spacings must be positive"));
    }
    if hx > width || hy > height {
        return Err(Error::invalid("spacing exceeds the rectangle side"));
    }
    grid_mesh(&subdivide(&[0.0, width], hx), &subdivide(&[0.0, height], hy), |_, _| true)
}

fn chamber_x_breaks() -> [f64; 4] {
    let l = DUMBBELL_HANDLE_HALF_LENGTH;
    [-1.0 - l, -l, l, 1.0 + l]
}

fn in_chamber(x: f64, y: f64) -> bool {
    let l = DUMBBELL_HANDLE_HALF_LENGTH;
    y.abs() < 0.5 && (x.abs() > l && x.abs() < 1.0 + l)
}

/// Two unit-square chambers `[-1.25, -0.25] x [-0.5, 0.5]` and its mirror,
/// joined by the handle `[-0.25, 0.25] x [-w/2, w/2]`.
pub fn generate_dumbbell(handle_width: f64, h: f64) -> Result<Mesh> {
    if !(handle_width > 0.0 && handle_width <= 1.0) {
        return Err(Error::invalid(format!(
            "handle width must satisfy 0 < width <= 1 (the chamber diameter), got {handle_width}"
        )));
    }
    if !(h > 0.0 && h <= handle_width / 2.0) {
        return Err(Error::invalid(format!(
            "mesh size h = {h} is too coarse for the handle: need h <= width/2 = {}",
            handle_width / 2.0
        )));
    }
    let xs = subdivide(&chamber_x_breaks(), h);
    let hw = handle_width / 2.0;
    let ybreaks: Vec<f64> = if hw < 0.5 {
        vec![-0.5, -hw, hw, 0.5]
    } else {
        vec![-0.5, 0.5]
    };
    let ys = subdivide(&ybreaks, h);
    grid_mesh(&xs, &ys, |x, y| {
        in_chamber(x, y) || (x.abs() < DUMBBELL_HANDLE_HALF_LENGTH && y.abs() < hw)
    })
}

/// Limit of the dumbbell family: the two chambers without a handle.
pub fn generate_two_chambers(h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h <= 0.25) {
        return Err(Error::invalid(format!(
            "mesh size h must satisfy 0 < h <= 1/4, got {h}"
        )));
    }
    let xs = subdivide(&chamber_x_breaks(), h);
    let ys = subdivide(&[-0.5, 0.5], h);
    grid_mesh(&xs, &ys, in_chamber)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_radii_contain_dyadic_levels() {
        let r = graded_radii(0.04, None);
        for k in 0..=9 {
            let d = 2f64.powi(-k);
            assert!(r.contains(&d), "missing ring at 2^-{k}");
        }
        assert!(r.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*r.last().unwrap(), 1.0);
    }

    #[test]
    fn non_dyadic_tip_is_inserted() {
        let r = graded_radii(0.05, Some(0.3));
        assert!(r.contains(&0.3));
        assert!(r.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn subdivide_respects_spacing() {
        let g = subdivide(&[-0.5, -0.025, 0.025, 0.5], 0.02);
        assert!(g.windows(2).all(|w| w[1] - w[0] <= 0.02 + 1e-12));
        assert!(g.contains(&-0.025) && g.contains(&0.025));
    }
}
