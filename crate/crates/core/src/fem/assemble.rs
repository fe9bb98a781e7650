use super::coeffs::{CoeffValues, CoefficientSet};
use super::quadrature::{map_point, ORDER2};
use super::space::FunctionSpace;
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::mesh::Point;

/// Gradients of the three barycentric basis functions on a triangle.
pub fn element_gradients(tri: &[Point; 3]) -> [[f64; 2]; 3] {
    let [a, b, c] = *tri;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    [
        [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
        [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
        [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
    ]
}

/// Element matrix `K[k][l] = a(t; φ_l, φ_k)` with the order-2 rule.
fn element_form(
    pts: &[Point; 3],
    area: f64,
    coeff_at: impl Fn(Point) -> CoeffValues,
) -> std::result::Result<[[f64; 3]; 3], Point> {
    let g = element_gradients(pts);
    let mut k = [[0.0; 3]; 3];
    for (bary, w) in ORDER2.bary.iter().zip(ORDER2.weights) {
        let x = map_point(pts, bary);
        let c = coeff_at(x);
        if !c.is_finite() {
            return Err(x);
        }
        let wa = w * area;
        for l in 0..3 {
            // flux of the trial function: a_ij ∂_j φ_l + a_i φ_l
            let flux = [
                c.a[0][0] * g[l][0] + c.a[0][1] * g[l][1] + c.a_vec[0] * bary[l],
                c.a[1][0] * g[l][0] + c.a[1][1] * g[l][1] + c.a_vec[1] * bary[l],
            ];
            let drift = c.b_vec[0] * g[l][0] + c.b_vec[1] * g[l][1];
            for r in 0..3 {
                k[r][l] += wa
                    * (flux[0] * g[r][0]
                        + flux[1] * g[r][1]
                        + drift * bary[r]
                        + c.c0 * bary[l] * bary[r]);
            }
        }
    }
    Ok(k)
}

fn scatter(
    space: &FunctionSpace,
    mut element: impl FnMut(usize) -> Result<[[f64; 3]; 3]>,
) -> Result<SparseMatrix> {
    let mesh = space.mesh();
    let mut trip = Vec::with_capacity(9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let ke = element(t)?;
        let dofs = tri.map(|v| space.dof(v));
        for r in 0..3 {
            let Some(i) = dofs[r] else { continue };
            for l in 0..3 {
                if let Some(j) = dofs[l] {
                    trip.push((i, j, ke[r][l]));
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(space.n_dofs(), trip))
}

/// Matrix of the bilinear form at time `t`: entry `(k, l) = a(t; φ_l, φ_k)`.
pub fn assemble_form(space: &FunctionSpace, coeffs: &CoefficientSet, t: f64) -> Result<SparseMatrix> {
    let mesh = space.mesh();
    scatter(space, |e| {
        element_form(&mesh.triangle_points(e), mesh.signed_area(e), |x| coeffs.eval(x, t)).map_err(
            |x| Error::Assembly {
                element: e,
                time: t,
                what: format!("non-finite coefficient at {x:?}"),
            },
        )
    })
}

fn constant_form(space: &FunctionSpace, diffusion: f64, reaction: f64) -> Result<SparseMatrix> {
    let mesh = space.mesh();
    let c = CoeffValues {
        a: [[diffusion, 0.0], [0.0, diffusion]],
        a_vec: [0.0; 2],
        b_vec: [0.0; 2],
        c0: reaction,
    };
    scatter(space, |e| {
        Ok(element_form(&mesh.triangle_points(e), mesh.signed_area(e), |_| c)
            .expect("constant coefficients are finite"))
    })
}

/// Consistent P1 mass matrix (Gram matrix of the `L²` product).
pub fn assemble_mass(space: &FunctionSpace) -> Result<SparseMatrix> {
    constant_form(space, 0.0, 1.0)
}

/// P1 Laplacian `∫ ∇φ_l · ∇φ_k`.
pub fn assemble_stiffness(space: &FunctionSpace) -> Result<SparseMatrix> {
    constant_form(space, 1.0, 0.0)
}

/// Gram matrix of the V-norm `‖∇u‖² + ‖u‖²`.
pub fn assemble_vnorm_matrix(space: &FunctionSpace) -> Result<SparseMatrix> {
    constant_form(space, 1.0, 1.0)
}

/// Load vector `b_k = ∫ f(·, t) φ_k` with the order-2 rule.
pub fn assemble_load(
    space: &FunctionSpace,
    f: impl Fn(Point, f64) -> f64,
    t: f64,
) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let mut b = vec![0.0; space.n_dofs()];
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let pts = mesh.triangle_points(e);
        let area = mesh.signed_area(e);
        let dofs = tri.map(|v| space.dof(v));
        if dofs.iter().all(Option::is_none) {
            continue;
        }
        for (bary, w) in ORDER2.bary.iter().zip(ORDER2.weights) {
            let x = map_point(&pts, bary);
            let fx = f(x, t);
            if !fx.is_finite() {
                return Err(Error::Assembly {
                    element: e,
                    time: t,
                    what: format!("non-finite source value at {x:?}"),
                });
            }
            for r in 0..3 {
                if let Some(i) = dofs[r] {
                    b[i] += w * area * fx * bary[r];
                }
            }
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fem::{BoundaryCondition, Preset};
    use crate::mesh::{generate_disk, generate_unit_square, Mesh};

    fn spaces(mesh: Mesh) -> (FunctionSpace, FunctionSpace) {
        let m = Arc::new(mesh);
        (
            FunctionSpace::new(m.clone(), BoundaryCondition::Dirichlet),
            FunctionSpace::new(m, BoundaryCondition::Neumann),
        )
    }

    #[test]
    fn reference_element_mass() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![
                crate::mesh::BoundaryEdge { a: 0, b: 1, tag: crate::mesh::BoundaryTag::Outer },
                crate::mesh::BoundaryEdge { a: 1, b: 2, tag: crate::mesh::BoundaryTag::Outer },
                crate::mesh::BoundaryEdge { a: 2, b: 0, tag: crate::mesh::BoundaryTag::Outer },
            ],
            vec![],
            1.0,
        )
        .unwrap();
        let (_, n) = spaces(mesh);
        let m = assemble_mass(&n).unwrap();
        let a = 0.5;
        for i in 0..3 {
            for j in 0..3 {
                let want = a / 12.0 * if i == j { 2.0 } else { 1.0 };
                assert!((m.get(i, j) - want).abs() < 1e-15);
            }
        }
        let k = assemble_stiffness(&n).unwrap();
        let want = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                assert!((k.get(i, j) - w).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero_before_elimination() {
        let (d, n) = spaces(generate_unit_square(0.125).unwrap());
        let k = assemble_form(&n, &CoefficientSet::laplacian(), 0.0).unwrap();
        let ones = vec![1.0; n.n_dofs()];
        let rs = k.matvec(&ones);
        for (i, s) in rs.iter().enumerate() {
            assert!(s.abs() < 1e-13, "row {i}: {s}");
        }
        // Dirichlet matrix is the interior principal submatrix.
        let kd = assemble_form(&d, &CoefficientSet::laplacian(), 0.0).unwrap();
        for i in 0..d.n_dofs() {
            for j in 0..d.n_dofs() {
                let (vi, vj) = (d.vertex(i), d.vertex(j));
                let full = k.get(n.dof(vi).unwrap(), n.dof(vj).unwrap());
                assert!((kd.get(i, j) - full).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn reaction_form_is_mass() {
        let (_, n) = spaces(generate_disk(0.125).unwrap());
        let a = assemble_form(&n, &CoefficientSet::reaction(1.0), 0.0).unwrap();
        let m = assemble_mass(&n).unwrap();
        assert!(a.max_abs_diff(&m) < 1e-15);
        let total: f64 = m.matvec(&vec![1.0; n.n_dofs()]).iter().sum();
        assert!((total - n.mesh().area()).abs() < 1e-12);
    }

    #[test]
    fn linear_in_time_scaled_coefficient() {
        let (d, _) = spaces(generate_unit_square(0.125).unwrap());
        let one_plus_t = Preset::AffineT { c: 1.0, ct: 1.0 };
        let mut c = CoefficientSet::laplacian();
        c.a_ij[0][0] = one_plus_t.clone();
        c.a_ij[1][1] = one_plus_t;
        let k0 = assemble_form(&d, &c, 0.0).unwrap();
        let k1 = assemble_form(&d, &c, 1.0).unwrap();
        assert!(k1.max_abs_diff(&k0.scaled(2.0)) < 1e-14);
        let lap = assemble_stiffness(&d).unwrap();
        assert!(k0.max_abs_diff(&lap) < 1e-15);
    }

    #[test]
    fn non_finite_coefficient_names_element() {
        let (d, _) = spaces(generate_unit_square(0.25).unwrap());
        let c = CoefficientSet::laplacian().with_c0(Preset::constant(f64::NAN));
        match assemble_form(&d, &c, 0.5) {
            Err(Error::Assembly { element, time, .. }) => {
                assert_eq!(element, 0);
                assert_eq!(time, 0.5);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(assemble_load(&d, |_, _| f64::INFINITY, 0.0).is_err());
    }
}
