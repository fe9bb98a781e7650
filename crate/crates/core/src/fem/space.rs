use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Location, Mesh, Point};
use super::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// `V = H^1_0`: every boundary vertex (outer, hole, crack lips) is
    /// eliminated.
    Dirichlet,
    /// `V = H^1`: every vertex carries a dof, seam copies included.
    Neumann,
}

/// P1 space on a shared mesh. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    bc: BoundaryCondition,
    dof_of_vertex: Arc<Vec<Option<usize>>>,
    vertex_of_dof: Arc<Vec<usize>>,
}

impl FunctionSpace {
    pub fn new(mesh: Arc<Mesh>, bc: BoundaryCondition) -> Self {
        let mut dof_of_vertex = vec![None; mesh.n_vertices()];
        let mut vertex_of_dof = Vec::new();
        let mut used = vec![false; mesh.n_vertices()];
        for tri in mesh.triangles() {
            for &v in tri {
                used[v] = true;
            }
        }
        for v in 0..mesh.n_vertices() {
            let keep = used[v]
                && match bc {
                    BoundaryCondition::Dirichlet => !mesh.is_boundary_vertex(v),
                    BoundaryCondition::Neumann => true,
                };
            if keep {
                dof_of_vertex[v] = Some(vertex_of_dof.len());
                vertex_of_dof.push(v);
            }
        }
        FunctionSpace {
            mesh,
            bc,
            dof_of_vertex: Arc::new(dof_of_vertex),
            vertex_of_dof: Arc::new(vertex_of_dof),
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn n_dofs(&self) -> usize {
        self.vertex_of_dof.len()
    }

    pub fn dof(&self, vertex: usize) -> Option<usize> {
        self.dof_of_vertex[vertex]
    }

    pub fn vertex(&self, dof: usize) -> usize {
        self.vertex_of_dof[dof]
    }

    pub fn dof_point(&self, dof: usize) -> Point {
        self.mesh.vertices()[self.vertex_of_dof[dof]]
    }

    /// Same mesh instance and boundary condition.
    pub fn same_as(&self, other: &FunctionSpace) -> bool {
        self.bc == other.bc && Arc::ptr_eq(&self.mesh, &other.mesh)
    }
}

/// Coefficient vector of a P1 function on a [`FunctionSpace`].
#[derive(Debug, Clone)]
pub struct FEField {
    space: FunctionSpace,
    values: Vec<f64>,
}

impl FEField {
    pub fn new(space: FunctionSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.n_dofs() {
            return Err(Error::invalid(format!(
                "field has {} coefficients, space has {} dofs",
                values.len(),
                space.n_dofs()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("field coefficient {i} is not finite")));
        }
        Ok(FEField { space, values })
    }

    pub fn zeros(space: FunctionSpace) -> Self {
        let n = space.n_dofs();
        FEField {
            space,
            values: vec![0.0; n],
        }
    }

    pub fn constant(space: FunctionSpace, c: f64) -> Self {
        let n = space.n_dofs();
        FEField {
            space,
            values: vec![c; n],
        }
    }

    /// Nodal interpolant of `f` (boundary dofs of Dirichlet spaces are zero).
    pub fn interpolate(space: FunctionSpace, f: impl Fn(Point) -> f64) -> Self {
        let values = (0..space.n_dofs()).map(|d| f(space.dof_point(d))).collect();
        FEField { space, values }
    }

    /// Nodal interpolant that tells `f` whether the vertex lies on the lower
    /// crack lip, so that fields may jump across a slit.
    pub fn interpolate_sided(space: FunctionSpace, f: impl Fn(Point, bool) -> f64) -> Self {
        let mesh = space.mesh();
        let values = (0..space.n_dofs())
            .map(|d| {
                let v = space.vertex(d);
                f(mesh.vertices()[v], mesh.is_lower_lip(v))
            })
            .collect();
        FEField { space, values }
    }

    /// Sided nodal interpolant of a preset at time `t`.
    pub fn from_preset(space: FunctionSpace, preset: &Preset, t: f64) -> Self {
        Self::interpolate_sided(space, |x, lower| preset.eval_sided(x, t, lower))
    }

    pub fn space(&self) -> &FunctionSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at a mesh vertex (zero on eliminated Dirichlet vertices).
    pub fn vertex_value(&self, v: usize) -> f64 {
        self.space.dof(v).map_or(0.0, |d| self.values[d])
    }

    pub fn triangle_values(&self, t: usize) -> [f64; 3] {
        let tri = self.space.mesh().triangles()[t];
        [
            self.vertex_value(tri[0]),
            self.vertex_value(tri[1]),
            self.vertex_value(tri[2]),
        ]
    }

    pub fn eval_at(&self, loc: &Location) -> f64 {
        let v = self.triangle_values(loc.triangle);
        v[0] * loc.bary[0] + v[1] * loc.bary[1] + v[2] * loc.bary[2]
    }

    /// Constant gradient on triangle `t`.
    pub fn gradient_on(&self, t: usize) -> [f64; 2] {
        let g = super::element_gradients(&self.space.mesh().triangle_points(t));
        let v = self.triangle_values(t);
        [
            v[0] * g[0][0] + v[1] * g[1][0] + v[2] * g[2][0],
            v[0] * g[0][1] + v[1] * g[1][1] + v[2] * g[2][1],
        ]
    }

    /// Value at an arbitrary point, `None` outside the mesh.
    pub fn eval(&self, x: Point) -> Option<f64> {
        self.space.mesh().locate_point(x).map(|loc| self.eval_at(&loc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_cracked_disk, generate_unit_square};

    #[test]
    fn dirichlet_eliminates_boundary() {
        let mesh = Arc::new(generate_unit_square(0.25).unwrap());
        let d = FunctionSpace::new(mesh.clone(), BoundaryCondition::Dirichlet);
        let n = FunctionSpace::new(mesh, BoundaryCondition::Neumann);
        assert_eq!(n.n_dofs(), 25);
        assert_eq!(d.n_dofs(), 9);
        for dof in 0..d.n_dofs() {
            assert_eq!(d.dof(d.vertex(dof)), Some(dof));
        }
    }

    #[test]
    fn seam_copies_get_distinct_neumann_dofs() {
        let mesh = Arc::new(generate_cracked_disk(0.5, 0.1).unwrap());
        let n = FunctionSpace::new(mesh.clone(), BoundaryCondition::Neumann);
        let d = FunctionSpace::new(mesh.clone(), BoundaryCondition::Dirichlet);
        for &(p, q) in mesh.seams() {
            assert_ne!(n.dof(p), n.dof(q));
            assert!(n.dof(p).is_some() && n.dof(q).is_some());
            assert!(d.dof(p).is_none() && d.dof(q).is_none());
        }
    }
}
