//! P1 finite elements: spaces, coefficients, assembly and linear solvers.

mod assemble;
mod coeffs;
mod constants;
pub mod quadrature;
mod solve;
mod space;
mod sparse;

pub use assemble::{
    assemble_form, assemble_load, assemble_mass, assemble_stiffness, assemble_vnorm_matrix,
    element_gradients,
};
pub use coeffs::{CoefficientSet, Preset};
pub use constants::{coercivity_at, estimate_form_constants, FormConstants};
pub use solve::{solve_linear, solve_linear_from, DEFAULT_TOL};
pub use space::{BoundaryCondition, FEField, FunctionSpace};
pub use sparse::SparseMatrix;

/// Norms induced by the evolution triple `V ⊂ H ⊂ V'` on a fixed space.
///
/// `‖u‖²_V = ‖∇u‖² + ‖u‖²` for both boundary conditions; the dual norm of a
/// load vector `b` is `sqrt(bᵀ G⁻¹ b)` with `G` the V-Gram matrix.
#[derive(Debug, Clone)]
pub struct Norms {
    pub mass: SparseMatrix,
    pub gram: SparseMatrix,
}

impl Norms {
    pub fn new(space: &FunctionSpace) -> crate::Result<Self> {
        Ok(Norms {
            mass: assemble_mass(space)?,
            gram: assemble_vnorm_matrix(space)?,
        })
    }

    pub fn h_sq(&self, u: &[f64]) -> f64 {
        self.mass.quad_form(u)
    }

    pub fn v_sq(&self, u: &[f64]) -> f64 {
        self.gram.quad_form(u)
    }

    pub fn h_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(&self.mass.matvec(u), v)
    }

    /// Squared dual norm `bᵀ G⁻¹ b` through the discrete Riesz map.
    pub fn dual_sq(&self, b: &[f64]) -> crate::Result<f64> {
        if b.iter().all(|&x| x == 0.0) {
            return Ok(0.0);
        }
        let r = solve_linear(&self.gram, b, 1e-12)?;
        Ok(dot(b, &r).max(0.0))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
