//! Jacobi-preconditioned BiCGStab.

use super::sparse::SparseMatrix;
use super::{dot, norm2};
use crate::error::{Error, Result};

/// Relative residual tolerance used by the time steppers.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Solves `A x = b` to `‖Ax - b‖₂ <= tol ‖b‖₂`, starting from zero.
pub fn solve_linear(a: &SparseMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    solve_linear_from(a, b, vec![0.0; b.len()], tol)
}

/// As [`solve_linear`], starting from the guess `x`.
pub fn solve_linear_from(a: &SparseMatrix, b: &[f64], mut x: Vec<f64>, tol: f64) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n || x.len() != n {
        return Err(Error::invalid(format!(
            "dimension mismatch: matrix {n}, rhs {}, guess {}",
            b.len(),
            x.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| d == 0.0 || !d.is_finite()) {
        return Err(Error::SolverFailure {
            iterations: 0,
            residual: f64::INFINITY,
            reason: format!("zero or non-finite diagonal in row {i}"),
        });
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let target = tol * bnorm;
    let max_iter = (10 * n).max(20);

    let mut r = residual(a, b, &x);
    let mut rnorm = norm2(&r);
    if rnorm <= target {
        return Ok(x);
    }
    let mut r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut restarts = 0usize;

    for iter in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() <= 1e-30 * dot(&r_hat, &r_hat).sqrt() * rnorm || omega == 0.0 {
            // r has become orthogonal to the shadow residual: restart.
            restarts += 1;
            if restarts > 50 {
                return Err(Error::SolverFailure {
                    iterations: iter,
                    residual: rnorm / bnorm,
                    reason: "repeated breakdown".into(),
                });
            }
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.iter_mut().for_each(|e| *e = 0.0);
            p.iter_mut().for_each(|e| *e = 0.0);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = inv_diag[i] * p[i];
        }
        a.matvec_into(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            omega = 0.0;
            continue;
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) <= target {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            r = residual(a, b, &x);
            rnorm = norm2(&r);
            if rnorm <= target {
                return Ok(x);
            }
            omega = 0.0;
            continue;
        }
        for i in 0..n {
            z[i] = inv_diag[i] * s[i];
        }
        a.matvec_into(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        rnorm = norm2(&r);
        if !rnorm.is_finite() {
            return Err(Error::SolverFailure {
                iterations: iter,
                residual: f64::INFINITY,
                reason: "non-finite residual".into(),
            });
        }
        if rnorm <= target {
            // confirm with the true residual before returning
            r = residual(a, b, &x);
            rnorm = norm2(&r);
            if rnorm <= target {
                return Ok(x);
            }
            omega = 0.0;
        }
    }
    Err(Error::SolverFailure {
        iterations: max_iter,
        residual: rnorm / bnorm,
        reason: "maximum iterations exceeded".into(),
    })
}

fn residual(a: &SparseMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.matvec(x);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let b = vec![1.0, -2.0, 3.5, 0.25];
        let x = solve_linear(&SparseMatrix::identity(4), &b, 1e-12).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn random_spd_matches_dense_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20;
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = &g * g.transpose() + DMatrix::identity(n, n) * (n as f64);
        let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let oracle = a.clone().lu().solve(&b).unwrap();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).iter().copied().collect()).collect();
        let x = solve_linear(&SparseMatrix::from_dense(&rows), b.as_slice(), 1e-13).unwrap();
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn nonsymmetric_system() {
        let rows = vec![
            vec![4.0, 1.0, 0.0],
            vec![-2.0, 5.0, 1.0],
            vec![0.0, -3.0, 6.0],
        ];
        let a = SparseMatrix::from_dense(&rows);
        let b = vec![1.0, 2.0, 3.0];
        let x = solve_linear(&a, &b, 1e-12).unwrap();
        let r = residual(&a, &b, &x);
        assert!(norm2(&r) <= 1e-12 * norm2(&b));
    }

    #[test]
    fn zero_row_is_an_error() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(
            solve_linear(&a, &[1.0, 1.0], 1e-10),
            Err(Error::SolverFailure { .. })
        ));
    }
}
