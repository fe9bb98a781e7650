use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DGrid;
use crate::error::{Error, Result};
use crate::fem::{BoundaryCondition, FEField};
use crate::mesh::{Location, Mesh};
use crate::parabolic::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedKind {
    /// `ũ = u` on the domain, `0` outside; valid for `H¹₀`.
    DirichletZeroExtension,
    /// `(ũ, ∇̃u)` with both parts extended by zero.
    NeumannPair,
}

impl EmbedKind {
    pub fn for_bc(bc: BoundaryCondition) -> Self {
        match bc {
            BoundaryCondition::Dirichlet => EmbedKind::DirichletZeroExtension,
            BoundaryCondition::Neumann => EmbedKind::NeumannPair,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmbedKind::DirichletZeroExtension => "dirichlet_zero_extension",
            EmbedKind::NeumannPair => "neumann_pair",
        }
    }

    pub fn check(self, bc: BoundaryCondition) -> Result<()> {
        if self == EmbedKind::DirichletZeroExtension && bc != BoundaryCondition::Dirichlet {
            return Err(Error::invalid(
                "extension by zero is only defined for Dirichlet spaces; use the Neumann pair",
            ));
        }
        Ok(())
    }
}

/// Location of every D-grid sample in a mesh (`None` outside the domain).
#[derive(Debug, Clone)]
pub struct Sampler {
    locations: Vec<Option<Location>>,
}

impl Sampler {
    pub fn new(mesh: &Mesh, grid: &DGrid) -> Result<Self> {
        if (mesh.holdall_radius() - grid.radius()).abs() > 1e-12 * grid.radius() {
            return Err(Error::invalid(format!(
                "mesh hold-all radius {} differs from the grid radius {}",
                mesh.holdall_radius(),
                grid.radius()
            )));
        }
        mesh.locator();
        let locations = grid.points().par_iter().map(|&x| mesh.locate_point(x)).collect();
        Ok(Sampler { locations })
    }

    pub fn locations(&self) -> &[Option<Location>] {
        &self.locations
    }

    pub fn inside_count(&self) -> usize {
        self.locations.iter().filter(|l| l.is_some()).count()
    }
}

/// Sample values (and raw gradient samples) of a field over the D-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedField {
    pub kind: EmbedKind,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

/// Squared distances split into value and gradient parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SplitSq {
    pub value: f64,
    pub grad: f64,
}

impl SplitSq {
    pub fn total(&self) -> f64 {
        self.value + self.grad
    }
}

impl EmbeddedField {
    pub fn zeros(kind: EmbedKind, n: usize) -> Self {
        EmbeddedField {
            kind,
            values: vec![0.0; n],
            grads: vec![[0.0; 2]; n],
        }
    }

    /// `‖ũ‖²_{L²(D)}` and `‖∇̃u‖²_{L²(D)}`.
    pub fn norm_sq(&self, grid: &DGrid) -> SplitSq {
        let mut s = SplitSq::default();
        for ((v, g), w) in self.values.iter().zip(&self.grads).zip(grid.weights()) {
            s.value += w * v * v;
            s.grad += w * (g[0] * g[0] + g[1] * g[1]);
        }
        s
    }

    pub fn distance_sq(&self, other: &EmbeddedField, grid: &DGrid) -> SplitSq {
        let mut s = SplitSq::default();
        for i in 0..self.values.len() {
            let w = grid.weights()[i];
            let dv = self.values[i] - other.values[i];
            let dg = [self.grads[i][0] - other.grads[i][0], self.grads[i][1] - other.grads[i][1]];
            s.value += w * dv * dv;
            s.grad += w * (dg[0] * dg[0] + dg[1] * dg[1]);
        }
        s
    }

    /// `sqrt(Σ w (Δv² + |Δg|²))`.
    pub fn distance(&self, other: &EmbeddedField, grid: &DGrid) -> f64 {
        self.distance_sq(other, grid).total().sqrt()
    }
}

/// Embeds a field through a precomputed sampler of its mesh.
pub fn embed_with(field: &FEField, kind: EmbedKind, sampler: &Sampler) -> Result<EmbeddedField> {
    kind.check(field.space().bc())?;
    let mesh = field.space().mesh();
    let tri_grads: Vec<[f64; 2]> = (0..mesh.n_triangles()).map(|t| field.gradient_on(t)).collect();
    let n = sampler.locations.len();
    let mut out = EmbeddedField::zeros(kind, n);
    for (i, loc) in sampler.locations.iter().enumerate() {
        if let Some(loc) = loc {
            out.values[i] = field.eval_at(loc);
            out.grads[i] = tri_grads[loc.triangle];
        }
    }
    Ok(out)
}

pub fn embed(field: &FEField, kind: EmbedKind, grid: &DGrid) -> Result<EmbeddedField> {
    let sampler = Sampler::new(field.space().mesh(), grid)?;
    embed_with(field, kind, &sampler)
}

pub fn embed_trajectory(traj: &Trajectory, kind: EmbedKind, grid: &DGrid) -> Result<Vec<EmbeddedField>> {
    let sampler = Sampler::new(traj.space().mesh(), grid)?;
    (0..traj.grid().n_nodes())
        .into_par_iter()
        .map(|k| embed_with(&traj.field(k), kind, &sampler))
        .collect()
}
