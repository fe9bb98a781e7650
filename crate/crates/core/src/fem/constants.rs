//! Sampled estimates of the continuity and coercivity constants of the form.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assemble::{assemble_form, assemble_mass, assemble_vnorm_matrix};
use super::coeffs::CoefficientSet;
use super::solve::solve_linear;
use super::space::FunctionSpace;
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Above this size the smallest eigenvalue is found by inverse iteration.
const DENSE_LIMIT: usize = 800;

/// Coercivity is taken to hold without shift above this threshold.
const COERCIVE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormConstants {
    /// Largest sampled `|a(t; u, v)|` over unit V-norm pairs.
    pub m_est: f64,
    /// Coercivity constant valid with the shift `lambda_est` at every sample.
    pub alpha_est: f64,
    pub lambda_est: f64,
}

fn dense(m: &SparseMatrix) -> DMatrix<f64> {
    let n = m.dim();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for (j, v) in m.row(i) {
            d[(i, j)] = v;
        }
    }
    d
}

/// Smallest `μ` with `S x = μ B x` for symmetric `S` and SPD `B`.
/// `lower` must be a strict lower bound for the spectrum (used as the shift
/// of the inverse iteration on large problems).
pub(crate) fn min_generalized_eigenvalue(s: &SparseMatrix, b: &SparseMatrix, lower: f64) -> Result<f64> {
    let n = s.dim();
    if n == 0 {
        return Err(Error::Eigen("empty space".into()));
    }
    if n <= DENSE_LIMIT {
        let chol = dense(b)
            .cholesky()
            .ok_or_else(|| Error::Eigen("norm matrix is not positive definite".into()))?;
        let l = chol.l();
        let x = l
            .solve_lower_triangular(&dense(s))
            .ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
        let c = l
            .solve_lower_triangular(&x.transpose())
            .ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        return Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let shift = lower - 1.0;
    let shifted = s.combine(1.0, b, -shift);
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i * 7919) % 13) as f64 / 13.0).collect();
    let mut mu_old = f64::INFINITY;
    for _ in 0..5000 {
        let bx = b.matvec(&x);
        let y = solve_linear(&shifted, &bx, 1e-12)?;
        let nrm = b.quad_form(&y).sqrt();
        x = y.iter().map(|v| v / nrm).collect();
        let mu = s.quad_form(&x);
        if (mu - mu_old).abs() <= 1e-11 * (1.0 + mu.abs()) {
            return Ok(mu);
        }
        mu_old = mu;
    }
    Err(Error::Eigen(format!(
        "inverse iteration did not converge (last estimate {mu_old})"
    )))
}

/// Crude lower bound of `a(u,u) / ‖u‖²` from the declared constants.
fn spectral_lower_bound(coeffs: &CoefficientSet) -> f64 {
    let m = coeffs.bound.abs();
    let alpha = coeffs.alpha.max(1e-12);
    -(2.0 * m * m / alpha + m) - 1.0
}

/// Largest `α` with `a(t; u, u) + λ ‖u‖²_H >= α ‖u‖²_V` on the discrete space.
pub fn coercivity_at(space: &FunctionSpace, coeffs: &CoefficientSet, t: f64, lambda: f64) -> Result<f64> {
    let a = assemble_form(space, coeffs, t)?.symmetric_part();
    let mass = assemble_mass(space)?;
    let gram = assemble_vnorm_matrix(space)?;
    let s = a.combine(1.0, &mass, lambda);
    min_generalized_eigenvalue(&s, &gram, spectral_lower_bound(coeffs) + lambda.min(0.0))
}

fn random_unit(rng: &mut ChaCha8Rng, gram: &SparseMatrix) -> Vec<f64> {
    let n = gram.dim();
    let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nrm = gram.quad_form(&u).sqrt();
    u.iter_mut().for_each(|x| *x /= nrm);
    u
}

/// Estimates `(M, α, λ)` of the continuity and Gårding inequalities.
///
/// `M` is the largest `|a(t; u, v)|` over `n_samples` random times in
/// `t_range` and random V-unit pairs. If the symmetrised form is coercive
/// without shift at every sampled time, `λ = 0` and `α` is the smallest
/// generalised eigenvalue of `(A_sym, G)`; otherwise `λ = 1 - ν` with `ν` the
/// smallest eigenvalue of `(A_sym, Mass)`, and `α` is recomputed with that
/// shift.
pub fn estimate_form_constants(
    space: &FunctionSpace,
    coeffs: &CoefficientSet,
    t_range: (f64, f64),
    n_samples: usize,
    seed: u64,
) -> Result<FormConstants> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    if space.n_dofs() == 0 {
        return Err(Error::invalid("space has no degrees of freedom"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mass = assemble_mass(space)?;
    let gram = assemble_vnorm_matrix(space)?;
    let times: Vec<f64> = (0..n_samples)
        .map(|_| {
            if t_range.1 > t_range.0 {
                rng.random_range(t_range.0..=t_range.1)
            } else {
                t_range.0
            }
        })
        .collect();
    let eig_times: Vec<f64> = if coeffs.depends_on_time() {
        times.clone()
    } else {
        vec![times[0]]
    };
    let lower = spectral_lower_bound(coeffs);

    let mut m_est = 0.0_f64;
    let mut cached: Option<SparseMatrix> = None;
    for &t in &times {
        let a = match (&cached, coeffs.depends_on_time()) {
            (Some(a), false) => a.clone(),
            _ => {
                let a = assemble_form(space, coeffs, t)?;
                cached = Some(a.clone());
                a
            }
        };
        let u = random_unit(&mut rng, &gram);
        let v = random_unit(&mut rng, &gram);
        m_est = m_est.max(a.bilinear(&u, &v).abs());
        // also probe the diagonal a(u, u) so that coercive forms are seen
        m_est = m_est.max(a.quad_form(&u).abs());
    }

    let mut syms = Vec::with_capacity(eig_times.len());
    for &t in &eig_times {
        syms.push(assemble_form(space, coeffs, t)?.symmetric_part());
    }
    let mut mu0 = f64::INFINITY;
    for s in &syms {
        mu0 = mu0.min(min_generalized_eigenvalue(s, &gram, lower)?);
    }
    if mu0 > COERCIVE_EPS {
        return Ok(FormConstants {
            m_est,
            alpha_est: mu0,
            lambda_est: 0.0,
        });
    }
    let mut lambda = 0.0_f64;
    for s in &syms {
        let nu = min_generalized_eigenvalue(s, &mass, lower * 1e3)?;
        lambda = lambda.max(1.0 - nu);
    }
    let mut alpha = f64::INFINITY;
    for s in &syms {
        let shifted = s.combine(1.0, &mass, lambda);
        alpha = alpha.min(min_generalized_eigenvalue(&shifted, &gram, lower)?);
    }
    Ok(FormConstants {
        m_est,
        alpha_est: alpha,
        lambda_est: lambda,
    })
}

/// `yᵀ A x` helper for tests that want the raw form value.
#[cfg(test)]
pub(crate) fn form_value(a: &SparseMatrix, u: &[f64], v: &[f64]) -> f64 {
    super::dot(&a.matvec(u), v)
}
