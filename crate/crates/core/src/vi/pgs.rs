use crate::error::{Error, Result};
use crate::fem::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgsOptions {
    /// Over-relaxation factor in `(0, 2)`.
    pub omega: f64,
    /// Largest nodal change of a sweep (and of an outer iterate) at convergence.
    pub change_tol: f64,
    /// Bound on `max_i |min(u_i - ψ_i, r_i / B_ii)|` at convergence.
    pub residual_tol: f64,
    pub max_sweeps: usize,
}

impl Default for PgsOptions {
    fn default() -> Self {
        PgsOptions {
            omega: 1.0,
            change_tol: 1e-10,
            residual_tol: 1e-8,
            max_sweeps: 100_000,
        }
    }
}

impl PgsOptions {
    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgsStats {
    pub sweeps: usize,
    pub outer: usize,
    pub residual: f64,
}

/// `max_i |min(u_i - ψ_i, r_i / B_ii)|` with `r = B u - rhs`.
pub fn complementarity_residual(b: &SparseMatrix, rhs: &[f64], lower: &[f64], u: &[f64]) -> f64 {
    let r = b.matvec(u);
    let diag = b.diagonal();
    (0..u.len())
        .map(|i| {
            let gap = u[i] - lower[i];
            let res = (r[i] - rhs[i]) / diag[i];
            gap.min(res).abs()
        })
        .fold(0.0, f64::max)
}

fn sweep(s: &SparseMatrix, diag: &[f64], rhs: &[f64], lower: &[f64], omega: f64, u: &mut [f64]) -> f64 {
    let mut change = 0.0_f64;
    for i in 0..u.len() {
        let mut acc = rhs[i];
        for (j, v) in s.row(i) {
            if j != i {
                acc -= v * u[j];
            }
        }
        let gs = acc / diag[i];
        let new = ((1.0 - omega) * u[i] + omega * gs).max(lower[i]);
        change = change.max((new - u[i]).abs());
        u[i] = new;
    }
    change
}

/// Solves the discrete obstacle problem `u >= lower`, `B u - rhs >= 0`,
/// `(B u - rhs)ᵀ (u - lower) = 0` by projected SOR on the symmetric part of
/// `B`, with an outer Richardson iteration on the skew part. Entries of
/// `lower` may be `-∞` (unconstrained dofs).
pub fn solve_obstacle(
    b: &SparseMatrix,
    rhs: &[f64],
    lower: &[f64],
    x0: Vec<f64>,
    opts: &PgsOptions,
) -> Result<(Vec<f64>, PgsStats)> {
    let n = b.dim();
    if rhs.len() != n || lower.len() != n || x0.len() != n {
        return Err(Error::invalid("obstacle problem dimensions do not match"));
    }
    if !(opts.omega > 0.0 && opts.omega < 2.0) {
        return Err(Error::invalid(format!("omega must lie in (0, 2), got {}", opts.omega)));
    }
    let s = b.symmetric_part();
    let skew = b.combine(1.0, &s, -1.0);
    let scale = s.diagonal().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let symmetric = (0..n).all(|i| skew.row(i).all(|(_, v)| v.abs() <= 1e-15 * scale));
    let diag = s.diagonal();
    if let Some(i) = diag.iter().position(|d| !(*d > 0.0)) {
        return Err(Error::invalid(format!("non-positive diagonal entry at row {i}")));
    }
    let mut u: Vec<f64> = x0.iter().zip(lower).map(|(x, l)| x.max(*l)).collect();
    let mut outer_rhs = rhs.to_vec();
    if !symmetric {
        let nu = skew.matvec(&u);
        outer_rhs.iter_mut().zip(&nu).for_each(|(r, x)| *r -= x);
    }
    let mut outer_start = u.clone();
    let mut outer = 0;
    let mut residual = f64::INFINITY;
    for sweeps in 1..=opts.max_sweeps {
        let change = sweep(&s, &diag, &outer_rhs, lower, opts.omega, &mut u);
        if change > opts.change_tol {
            continue;
        }
        residual = complementarity_residual(b, rhs, lower, &u);
        if symmetric {
            if residual <= opts.residual_tol {
                return Ok((u, PgsStats { sweeps, outer: 1, residual }));
            }
            continue;
        }
        outer += 1;
        let outer_change = u
            .iter()
            .zip(&outer_start)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if outer_change <= opts.change_tol && residual <= opts.residual_tol {
            return Ok((u, PgsStats { sweeps, outer, residual }));
        }
        outer_start.clone_from(&u);
        let nu = skew.matvec(&u);
        for i in 0..n {
            outer_rhs[i] = rhs[i] - nu[i];
        }
    }
    if residual.is_infinite() {
        residual = complementarity_residual(b, rhs, lower, &u);
    }
    Err(Error::PgsFailure {
        sweeps: opts.max_sweeps,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_matches_linear_solve() {
        let b = SparseMatrix::from_dense(&[
            vec![4.0, -1.0, 0.0],
            vec![-1.0, 4.0, -1.0],
            vec![0.0, -1.0, 4.0],
        ]);
        let rhs = [1.0, 2.0, 3.0];
        let (u, _) = solve_obstacle(&b, &rhs, &[f64::NEG_INFINITY; 3], vec![0.0; 3], &PgsOptions::default()).unwrap();
        let r = b.matvec(&u);
        for i in 0..3 {
            assert!((r[i] - rhs[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn active_constraint_and_complementarity() {
        // 1-D Laplacian with a downward load pressing on a zero obstacle
        let n = 9;
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            rows[i][i] = 2.0;
            if i > 0 {
                rows[i][i - 1] = -1.0;
            }
            if i + 1 < n {
                rows[i][i + 1] = -1.0;
            }
        }
        let b = SparseMatrix::from_dense(&rows);
        let rhs = vec![-1.0; n];
        let (u, st) = solve_obstacle(&b, &rhs, &vec![0.0; n], vec![1.0; n], &PgsOptions::default()).unwrap();
        assert!(u.iter().all(|&x| x == 0.0));
        assert!(st.residual <= 1e-8);
    }

    #[test]
    fn skew_part_handled_by_outer_iteration() {
        let b = SparseMatrix::from_dense(&[
            vec![4.0, -1.5, 0.0],
            vec![-0.5, 4.0, -1.5],
            vec![0.0, -0.5, 4.0],
        ]);
        let rhs = [1.0, -3.0, 2.0];
        let lower = [0.0, 0.0, 0.0];
        let (u, st) = solve_obstacle(&b, &rhs, &lower, vec![0.0; 3], &PgsOptions::default()).unwrap();
        assert!(st.outer > 1);
        assert!(complementarity_residual(&b, &rhs, &lower, &u) <= 1e-8);
        assert!(u[1] == 0.0);
    }

    #[test]
    fn reports_non_convergence() {
        let b = SparseMatrix::from_dense(&[vec![1.0, 0.99], vec![0.99, 1.0]]);
        let opts = PgsOptions {
            max_sweeps: 3,
            ..PgsOptions::default()
        };
        let err = solve_obstacle(&b, &[1.0, -1.0], &[f64::NEG_INFINITY; 2], vec![0.0; 2], &opts).unwrap_err();
        assert!(matches!(err, Error::PgsFailure { sweeps: 3, .. }));
    }
}
