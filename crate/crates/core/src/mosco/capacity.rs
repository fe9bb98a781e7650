use crate::error::{Error, Result};
use crate::fem::{assemble_vnorm_matrix, BoundaryCondition, FunctionSpace};
use crate::mesh::{Mesh, Point};
use crate::vi::{solve_obstacle, PgsOptions};

/// Over-relaxation used for the capacity obstacle problem.
pub const CAPACITY_OMEGA: f64 = 1.8;

/// Vertices of `mesh` satisfying `pred`.
pub fn vertices_where(mesh: &Mesh, pred: impl Fn(Point) -> bool) -> Vec<usize> {
    (0..mesh.n_vertices())
        .filter(|&v| pred(mesh.vertices()[v]))
        .collect()
}

/// Discrete capacity surrogate: `min ‖ξ‖²_{H¹(D)}` over `ξ` in the Dirichlet
/// space on `D` with `ξ >= 1` at the target vertices.
pub fn capacity(background: &FunctionSpace, target: &[usize]) -> Result<f64> {
    if background.bc() != BoundaryCondition::Dirichlet {
        return Err(Error::invalid("capacity needs a Dirichlet background space on D"));
    }
    let mesh = background.mesh();
    let mut lower = vec![f64::NEG_INFINITY; background.n_dofs()];
    let mut any = false;
    for &v in target {
        if v >= mesh.n_vertices() {
            return Err(Error::invalid(format!("target vertex {v} does not exist")));
        }
        match background.dof(v) {
            Some(d) => {
                lower[d] = 1.0;
                any = true;
            }
            None => {
                return Err(Error::invalid(format!(
                    "target vertex {v} lies on the boundary of D"
                )))
            }
        }
    }
    if !any {
        return Ok(0.0);
    }
    let gram = assemble_vnorm_matrix(background)?;
    let x0: Vec<f64> = lower.iter().map(|&l| if l == 1.0 { 1.0 } else { 0.0 }).collect();
    let rhs = vec![0.0; background.n_dofs()];
    let opts = PgsOptions::default().with_omega(CAPACITY_OMEGA);
    let (xi, _) = solve_obstacle(&gram, &rhs, &lower, x0, &opts)?;
    Ok(gram.quad_form(&xi))
}
