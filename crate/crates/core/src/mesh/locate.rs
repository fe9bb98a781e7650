use super::{Mesh, Point};

/// Geometric tolerance on barycentric coordinates.
pub const TOL_GEO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub triangle: usize,
    pub bary: [f64; 3],
}

/// Uniform bucket grid over the mesh bounding box.
#[derive(Debug, Clone)]
pub struct PointLocator {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

pub(crate) fn barycentric(tri: &[Point; 3], x: Point) -> [f64; 3] {
    let [a, b, c] = *tri;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let la = ((b[0] - x[0]) * (c[1] - x[1]) - (c[0] - x[0]) * (b[1] - x[1])) / det;
    let lb = ((c[0] - x[0]) * (a[1] - x[1]) - (a[0] - x[0]) * (c[1] - x[1])) / det;
    let lc = ((a[0] - x[0]) * (b[1] - x[1]) - (b[0] - x[0]) * (a[1] - x[1])) / det;
    [la, lb, lc]
}

impl PointLocator {
    pub fn new(mesh: &Mesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in mesh.vertices() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        if mesh.n_triangles() == 0 {
            return PointLocator {
                origin: [0.0; 2],
                cell: 1.0,
                nx: 0,
                ny: 0,
                buckets: Vec::new(),
            };
        }
        let w = (hi[0] - lo[0]).max(1e-12);
        let hgt = (hi[1] - lo[1]).max(1e-12);
        let target = (mesh.n_triangles() as f64 / 2.0).max(1.0);
        let cell = (w * hgt / target).sqrt().max(1e-9);
        let nx = ((w / cell).ceil() as usize).max(1);
        let ny = ((hgt / cell).ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        let clamp = |v: f64, n: usize| -> usize { (v.max(0.0) as usize).min(n - 1) };
        for t in 0..mesh.n_triangles() {
            let pts = mesh.triangle_points(t);
            let (mut tlo, mut thi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in &pts {
                for d in 0..2 {
                    tlo[d] = tlo[d].min(p[d]);
                    thi[d] = thi[d].max(p[d]);
                }
            }
            let i0 = clamp((tlo[0] - lo[0]) / cell - 1e-9, nx);
            let i1 = clamp((thi[0] - lo[0]) / cell + 1e-9, nx);
            let j0 = clamp((tlo[1] - lo[1]) / cell - 1e-9, ny);
            let j1 = clamp((thi[1] - lo[1]) / cell + 1e-9, ny);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(t as u32);
                }
            }
        }
        PointLocator {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    /// Finds the triangle containing `x`. Among several candidates (points on
    /// shared edges or vertices) the most interior one wins; exact ties are
    /// resolved towards the upper crack lip, then towards the lowest index.
    pub fn locate(&self, mesh: &Mesh, x: Point) -> Option<Location> {
        if self.buckets.is_empty() {
            return None;
        }
        let fi = (x[0] - self.origin[0]) / self.cell;
        let fj = (x[1] - self.origin[1]) / self.cell;
        if fi < -1e-9 || fj < -1e-9 || fi > self.nx as f64 + 1e-9 || fj > self.ny as f64 + 1e-9 {
            return None;
        }
        let i = (fi.max(0.0) as usize).min(self.nx - 1);
        let j = (fj.max(0.0) as usize).min(self.ny - 1);
        let mut best: Option<(f64, bool, Location)> = None;
        for &t in &self.buckets[j * self.nx + i] {
            let t = t as usize;
            let bary = barycentric(&mesh.triangle_points(t), x);
            let worst = bary.iter().copied().fold(f64::INFINITY, f64::min);
            if worst < -TOL_GEO {
                continue;
            }
            let upper = mesh.triangles()[t].iter().any(|&v| mesh.is_upper_lip(v));
            let cand = Location { triangle: t, bary };
            let better = match &best {
                None => true,
                Some((bw, bu, _)) => {
                    if worst - bw > TOL_GEO {
                        true
                    } else if (worst - bw).abs() <= TOL_GEO {
                        upper && !bu
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((worst, upper, cand));
            }
        }
        best.map(|(_, _, loc)| loc)
    }
}
