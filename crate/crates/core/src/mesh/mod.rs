//! Conforming planar triangulations with crack seams and tagged boundaries.
//!
//! A crack is represented by duplicated vertices: both lips of a slit own
//! their own copy of every vertex strictly beyond the crack tip, so that P1
//! functions may jump across the slit. The pair `(upper, lower)` is recorded
//! as a seam and no element ever references both copies.

mod family;
mod generate;
mod io;
mod locate;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use family::{DomainFamily, FamilyKind};
pub use generate::{
    generate_cracked_disk, generate_disk, generate_dumbbell, generate_fixed_hole,
    generate_rectangle, generate_two_chambers, generate_unit_square, DUMBBELL_HANDLE_HALF_LENGTH,
};
pub use io::{read_mesh, read_mesh_file, write_mesh, write_mesh_file};
pub(crate) use io::fmt_real;
pub use locate::{Location, PointLocator, TOL_GEO};
pub(crate) use locate::barycentric;

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    Outer,
    CrackUpper,
    CrackLower,
    Hole,
}

impl BoundaryTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Outer => "outer",
            BoundaryTag::CrackUpper => "crack_upper",
            BoundaryTag::CrackLower => "crack_lower",
            BoundaryTag::Hole => "hole",
        }
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outer" => Ok(BoundaryTag::Outer),
            "crack_upper" => Ok(BoundaryTag::CrackUpper),
            "crack_lower" => Ok(BoundaryTag::CrackLower),
            "hole" => Ok(BoundaryTag::Hole),
            other => Err(Error::invalid(format!("unknown boundary tag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

/// Immutable triangulation of a planar domain contained in the hold-all
/// ball `{|x| <= holdall_radius}`.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    seams: Vec<(usize, usize)>,
    holdall_radius: f64,
    on_boundary: Vec<bool>,
    upper_lip: Vec<bool>,
    lower_lip: Vec<bool>,
    locator: OnceLock<PointLocator>,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.triangles == other.triangles
            && self.boundary_edges == other.boundary_edges
            && self.seams == other.seams
            && self.holdall_radius == other.holdall_radius
    }
}

/// Hold-all radius rule shared by generation and file input: the unit ball
/// when everything fits inside it, otherwise 1.5 times the bounding radius.
pub fn holdall_radius_for(vertices: &[Point]) -> f64 {
    let rmax = vertices
        .iter()
        .map(|p| p[0].hypot(p[1]))
        .fold(0.0_f64, f64::max);
    if rmax <= 1.0 + 1e-9 {
        1.0
    } else {
        1.5 * rmax
    }
}

impl Mesh {
    /// Builds a mesh and checks all structural invariants.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        seams: Vec<(usize, usize)>,
        holdall_radius: f64,
    ) -> Result<Self> {
        let nv = vertices.len();
        let mut on_boundary = vec![false; nv];
        let mut upper_lip = vec![false; nv];
        let mut lower_lip = vec![false; nv];
        for e in &boundary_edges {
            if e.a >= nv || e.b >= nv {
                return Err(Error::invalid("boundary edge references a missing vertex"));
            }
            on_boundary[e.a] = true;
            on_boundary[e.b] = true;
            if e.tag == BoundaryTag::CrackUpper {
                upper_lip[e.a] = true;
                upper_lip[e.b] = true;
            }
            if e.tag == BoundaryTag::CrackLower {
                lower_lip[e.a] = true;
                lower_lip[e.b] = true;
            }
        }
        for &(p, q) in &seams {
            if p < nv && q < nv {
                upper_lip[p] = true;
                lower_lip[q] = true;
            }
        }
        // A crack tip belongs to both lips; it is not a lower-lip vertex.
        for v in 0..nv {
            if upper_lip[v] && lower_lip[v] {
                lower_lip[v] = false;
            }
        }
        let mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            seams,
            holdall_radius,
            on_boundary,
            upper_lip,
            lower_lip,
            locator: OnceLock::new(),
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn seams(&self) -> &[(usize, usize)] {
        &self.seams
    }

    pub fn holdall_radius(&self) -> f64 {
        self.holdall_radius
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    /// True for vertices that belong to the upper lip of a crack.
    pub fn is_upper_lip(&self, v: usize) -> bool {
        self.upper_lip[v]
    }

    /// True for lower-lip copies of crack vertices (the tip excluded).
    pub fn is_lower_lip(&self, v: usize) -> bool {
        self.lower_lip[v]
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [i, j, k] = self.triangles[t];
        [self.vertices[i], self.vertices[j], self.vertices[k]]
    }

    /// Signed area of triangle `t` (positive for counterclockwise order).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).sum()
    }

    /// Area of the triangles whose centroid satisfies `pred`.
    pub fn area_where(&self, pred: impl Fn(Point) -> bool) -> f64 {
        (0..self.n_triangles())
            .filter(|&t| pred(self.centroid(t)))
            .map(|t| self.signed_area(t))
            .sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Point location structure, built on first use.
    pub fn locator(&self) -> &PointLocator {
        self.locator.get_or_init(|| PointLocator::new(self))
    }

    /// Containing triangle and barycentric coordinates of `x`, or `None` when
    /// `x` lies outside the meshed domain.
    pub fn locate_point(&self, x: Point) -> Option<Location> {
        self.locator().locate(self, x)
    }

    /// Number of connected components of the element adjacency graph
    /// (elements are adjacent when they share a vertex).
    pub fn connected_components(&self) -> usize {
        let nv = self.n_vertices();
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for tri in &self.triangles {
            for k in 1..3 {
                let a = find(&mut parent, tri[0]);
                let b = find(&mut parent, tri[k]);
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut used = vec![false; nv];
        for tri in &self.triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        let mut roots: Vec<usize> = (0..nv)
            .filter(|&v| used[v])
            .map(|v| find(&mut parent, v))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Checks every structural invariant of the triangulation.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if !(self.holdall_radius > 0.0) {
            return Err(Error::invalid("hold-all radius must be positive"));
        }
        for (i, p) in self.vertices.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::invalid(format!("vertex {i} is not finite")));
            }
            if p[0].hypot(p[1]) > self.holdall_radius * (1.0 + 1e-12) {
                return Err(Error::invalid(format!(
                    "vertex {i} lies outside the hold-all ball"
                )));
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::invalid(format!("triangle {t} references a missing vertex")));
            }
            if !(self.signed_area(t) > 0.0) {
                return Err(Error::invalid(format!(
                    "triangle {t} has non-positive signed area"
                )));
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        if let Some((e, _)) = edge_count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::invalid(format!(
                "edge {e:?} is shared by more than two triangles"
            )));
        }
        let mut declared: Vec<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|e| (e.a.min(e.b), e.a.max(e.b)))
            .collect();
        declared.sort_unstable();
        let n_declared = declared.len();
        declared.dedup();
        if declared.len() != n_declared {
            return Err(Error::invalid("duplicate boundary edge"));
        }
        let mut free: Vec<(usize, usize)> = edge_count
            .iter()
            .filter(|(_, &c)| c == 1)
            .map(|(&e, _)| e)
            .collect();
        free.sort_unstable();
        if free != declared {
            return Err(Error::invalid(
                "boundary edge list does not match the edges owned by exactly one triangle",
            ));
        }
        let mut vertex_tris: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                vertex_tris[v].push(t);
            }
        }
        for &(p, q) in &self.seams {
            if p >= nv || q >= nv || p == q {
                return Err(Error::invalid("malformed seam pair"));
            }
            if self.vertices[p] != self.vertices[q] {
                return Err(Error::invalid(format!(
                    "seam pair ({p}, {q}) has distinct coordinates"
                )));
            }
            if vertex_tris[p]
                .iter()
                .any(|&t| self.triangles[t].contains(&q))
            {
                return Err(Error::invalid(format!(
                    "seam pair ({p}, {q}) is merged by a triangle"
                )));
            }
        }
        Ok(())
    }
}
