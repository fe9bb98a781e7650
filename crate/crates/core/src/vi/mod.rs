//! Parabolic variational inequalities over nodal lower obstacles.

mod pgs;

pub use pgs::{complementarity_residual, solve_obstacle, PgsOptions, PgsStats};

use crate::error::{Error, Result};
use crate::fem::{dot, CoefficientSet, FEField, FunctionSpace, Norms, Preset};
use crate::parabolic::{Operators, TimeGrid, Trajectory};

/// The set `{v : v >= ψ nodewise}`.
#[derive(Debug, Clone)]
pub struct ConvexConstraint {
    psi: FEField,
}

impl ConvexConstraint {
    pub fn new(psi: FEField) -> Self {
        ConvexConstraint { psi }
    }

    pub fn from_preset(space: FunctionSpace, psi: &Preset) -> Self {
        ConvexConstraint::new(FEField::from_preset(space, psi, 0.0))
    }

    pub fn space(&self) -> &FunctionSpace {
        self.psi.space()
    }

    pub fn psi(&self) -> &FEField {
        &self.psi
    }

    /// Smallest nodal margin `v - ψ`.
    pub fn margin(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(self.psi.values())
            .map(|(a, b)| a - b)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, v: &FEField, tol: f64) -> bool {
        v.space().same_as(self.space()) && self.margin(v.values()) >= -tol
    }
}

/// Nodewise `max(w, ψ)`, the H-projection for a lumped mass.
pub fn project_h(constraint: &ConvexConstraint, w: &FEField) -> Result<FEField> {
    if !w.space().same_as(constraint.space()) {
        return Err(Error::invalid("field and constraint live on different spaces"));
    }
    let values = w
        .values()
        .iter()
        .zip(constraint.psi.values())
        .map(|(a, b)| a.max(*b))
        .collect();
    FEField::new(w.space().clone(), values)
}

#[derive(Debug, Clone)]
pub struct VIProblem {
    pub space: FunctionSpace,
    pub coeffs: CoefficientSet,
    pub f: Preset,
    pub u0: FEField,
    pub grid: TimeGrid,
    pub constraint: ConvexConstraint,
}

impl VIProblem {
    pub fn new(
        space: FunctionSpace,
        coeffs: CoefficientSet,
        f: Preset,
        u0: FEField,
        grid: TimeGrid,
        constraint: ConvexConstraint,
    ) -> Result<Self> {
        let p = VIProblem {
            space,
            coeffs,
            f,
            u0,
            grid,
            constraint,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !self.u0.space().same_as(&self.space) || !self.constraint.space().same_as(&self.space) {
            return Err(Error::invalid("u0 and obstacle must live on the problem space"));
        }
        let m = self.constraint.margin(self.u0.values());
        if m < 0.0 {
            return Err(Error::invalid(format!("u0 violates the obstacle (margin {m:.3e})")));
        }
        Ok(())
    }
}

/// Implicit Euler for the obstacle problem: each step solves
/// `u >= ψ`, `(M/τ + A(t_{k+1})) u - M u^k / τ - b(t_{k+1}) >= 0` with
/// complementarity.
pub fn solve_parabolic_vi(p: &VIProblem) -> Result<Trajectory> {
    solve_parabolic_vi_with(p, &PgsOptions::default()).map(|(t, _)| t)
}

pub fn solve_parabolic_vi_with(p: &VIProblem, opts: &PgsOptions) -> Result<(Trajectory, Vec<PgsStats>)> {
    p.validate()?;
    let ops = Operators::new(&p.space, &p.coeffs, &p.f)?;
    let g = &p.grid;
    let tau = g.tau();
    let psi = p.constraint.psi.values();
    let fixed = if ops.is_autonomous() {
        Some(ops.mass.combine(1.0 / tau, &*ops.form(0.0)?, 1.0))
    } else {
        None
    };
    let mut values = Vec::with_capacity(g.n_nodes());
    let mut stats = Vec::with_capacity(g.steps);
    let mut u = p.u0.values().to_vec();
    values.push(u.clone());
    for step in 1..=g.steps {
        let t1 = g.node(step);
        let b = ops.load(t1).map_err(|e| e.at_step(step))?;
        let lhs = match &fixed {
            Some(l) => std::borrow::Cow::Borrowed(l),
            None => {
                let a = ops.form(t1).map_err(|e| e.at_step(step))?;
                std::borrow::Cow::Owned(ops.mass.combine(1.0 / tau, &a, 1.0))
            }
        };
        let mut rhs = ops.mass.matvec(&u);
        for i in 0..rhs.len() {
            rhs[i] = rhs[i] / tau + b[i];
        }
        let (next, st) = solve_obstacle(&lhs, &rhs, psi, u, opts).map_err(|e| e.at_step(step))?;
        u = next;
        values.push(u.clone());
        stats.push(st);
    }
    Ok((Trajectory::new(p.space.clone(), *g, values)?, stats))
}

/// Left side of the weak-solution inequality
/// `∫ ⟨v', v - u⟩ + a(t; u, v - u) - (f, v - u) dt + ½ ‖v(0) - u_0‖²_H`
/// with `v` piecewise linear in time and trapezoidal quadrature on each
/// grid interval. A weak solution gives a value `>= -tol` for every
/// feasible `v`.
pub fn weak_vi_residual(u: &Trajectory, p: &VIProblem, v: &Trajectory) -> Result<f64> {
    u.check_compatible(v)?;
    if !u.space().same_as(&p.space) || *u.grid() != p.grid {
        return Err(Error::invalid("trajectory does not belong to the problem"));
    }
    for k in 0..v.grid().n_nodes() {
        let m = p.constraint.margin(v.values(k));
        if m < -1e-12 {
            return Err(Error::invalid(format!(
                "test trajectory leaves K at node {k} (margin {m:.3e})"
            )));
        }
    }
    let ops = Operators::new(&p.space, &p.coeffs, &p.f)?;
    let g = &p.grid;
    let tau = g.tau();
    let diff = |k: usize| -> Vec<f64> { v.values(k).iter().zip(u.values(k)).map(|(a, b)| a - b).collect() };
    let mut total = 0.0;
    // time-derivative term: v' is constant on each interval
    for k in 0..g.steps {
        let dv: Vec<f64> = v
            .values(k + 1)
            .iter()
            .zip(v.values(k))
            .map(|(a, b)| (a - b) / tau)
            .collect();
        let mdv = ops.mass.matvec(&dv);
        total += 0.5 * tau * (dot(&mdv, &diff(k)) + dot(&mdv, &diff(k + 1)));
    }
    for (k, w) in g.trapezoid_weights().into_iter().enumerate() {
        let t = g.node(k);
        let d = diff(k);
        let a = ops.form(t)?;
        total += w * (a.bilinear(u.values(k), &d) - dot(&ops.load(t)?, &d));
    }
    let d0: Vec<f64> = v.values(0).iter().zip(p.u0.values()).map(|(a, b)| a - b).collect();
    total += 0.5 * ops.mass.quad_form(&d0);
    Ok(total)
}

/// Problem scale `1 + ‖u‖²_{L²(0,T;V)}` used for relative tolerances.
pub fn vi_scale(u: &Trajectory) -> Result<f64> {
    let norms = Norms::new(u.space())?;
    Ok(1.0 + u.l2_v_norm(&norms).powi(2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub min_margin: f64,
    /// `(node, dof)` pairs with margin below `-1e-12`.
    pub violations: Vec<(usize, usize)>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn feasibility_report(u: &Trajectory, constraint: &ConvexConstraint) -> Result<FeasibilityReport> {
    if !u.space().same_as(constraint.space()) {
        return Err(Error::invalid("trajectory and constraint live on different spaces"));
    }
    let psi = constraint.psi.values();
    let mut min_margin = f64::INFINITY;
    let mut violations = Vec::new();
    for k in 0..u.grid().n_nodes() {
        for (d, (a, b)) in u.values(k).iter().zip(psi).enumerate() {
            let m = a - b;
            min_margin = min_margin.min(m);
            if m < -1e-12 {
                violations.push((k, d));
            }
        }
    }
    Ok(FeasibilityReport {
        min_margin,
        violations,
    })
}
