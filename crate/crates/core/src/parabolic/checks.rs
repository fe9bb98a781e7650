use super::solve::Operators;
use super::{ParabolicProblem, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::fem::{assemble_mass, coercivity_at, dot, FEField, Norms};

/// Per-node sides of the discrete energy estimate
/// `‖u^k‖²_H + α τ Σ_{j≤k} ‖u^j‖²_V ≤ ‖u_0‖²_H + α⁻¹ τ Σ_{j≤k} ‖b_j‖²_{V'}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub alpha: f64,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `rhs - lhs` per node.
    pub margin: Vec<f64>,
}

impl EnergyReport {
    pub fn min_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Smallest discrete coercivity constant (λ = 0) over the grid nodes.
pub fn coercivity_on_grid(p: &ParabolicProblem) -> Result<f64> {
    if !p.coeffs.depends_on_time() {
        return coercivity_at(&p.space, &p.coeffs, p.grid.start, 0.0);
    }
    let mut alpha = f64::INFINITY;
    for t in p.grid.nodes() {
        alpha = alpha.min(coercivity_at(&p.space, &p.coeffs, t, 0.0)?);
    }
    Ok(alpha)
}

/// Checks the energy estimate at every node for an implicit Euler run.
/// `α` is the discrete coercivity constant over the grid; the form must be
/// coercive without shift.
pub fn energy_estimate_check(traj: &Trajectory, p: &ParabolicProblem) -> Result<EnergyReport> {
    if p.theta != 1.0 {
        return Err(Error::invalid("energy estimate requires theta = 1"));
    }
    let alpha = coercivity_on_grid(p)?;
    if alpha <= 1e-10 {
        return Err(Error::invalid(format!(
            "form is not coercive without shift (alpha = {alpha:.3e}); pre-shift the problem"
        )));
    }
    energy_estimate_with_alpha(traj, p, alpha)
}

/// As [`energy_estimate_check`] with a caller-supplied `α`.
pub fn energy_estimate_with_alpha(traj: &Trajectory, p: &ParabolicProblem, alpha: f64) -> Result<EnergyReport> {
    if !traj.space().same_as(&p.space) || *traj.grid() != p.grid {
        return Err(Error::invalid("trajectory does not belong to the problem"));
    }
    let norms = Norms::new(&p.space)?;
    let ops = Operators::new(&p.space, &p.coeffs, &p.f)?;
    let tau = p.grid.tau();
    let u0_sq = norms.h_sq(p.u0.values());
    let mut lhs = vec![norms.h_sq(traj.values(0))];
    let mut rhs = vec![u0_sq];
    let mut v_int = 0.0;
    let mut f_int = 0.0;
    for k in 1..p.grid.n_nodes() {
        v_int += tau * norms.v_sq(traj.values(k));
        f_int += tau * norms.dual_sq(&ops.load(p.grid.node(k))?)?;
        lhs.push(norms.h_sq(traj.values(k)) + alpha * v_int);
        rhs.push(u0_sq + f_int / alpha);
    }
    let margin: Vec<f64> = lhs.iter().zip(&rhs).map(|(l, r)| r - l).collect();
    for (k, (&l, &r)) in lhs.iter().zip(&rhs).enumerate() {
        if l > r + 1e-10 * (1.0 + r) {
            return Err(Error::EnergyViolation { node: k, lhs: l, rhs: r });
        }
    }
    Ok(EnergyReport {
        alpha,
        lhs,
        rhs,
        margin,
    })
}

/// Scalar test profile `φ` with derivative, used in the weak formulation.
pub struct TimeProfile {
    phi: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    dphi: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl TimeProfile {
    pub fn new(
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TimeProfile {
            phi: Box::new(phi),
            dphi: Box::new(dphi),
        }
    }

    /// `φ(t) = (end - t) / T`.
    pub fn ramp(grid: &TimeGrid) -> Self {
        let (end, len) = (grid.end(), grid.t_final);
        TimeProfile::new(move |t| (end - t) / len, move |_| -1.0 / len)
    }

    /// `φ(t) = cos(π (t - start) / (2T))`.
    pub fn quarter_cosine(grid: &TimeGrid) -> Self {
        let (s, len) = (grid.start, grid.t_final);
        let w = std::f64::consts::FRAC_PI_2 / len;
        TimeProfile::new(move |t| (w * (t - s)).cos(), move |t| -w * (w * (t - s)).sin())
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.phi)(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        (self.dphi)(t)
    }
}

/// `|LHS - RHS|` of the weak formulation
/// `-∫ (u|v) φ' + ∫ a(t; u, v) φ = (u_0|v) φ(0) + ∫ (f|v) φ`
/// with trapezoidal quadrature on the trajectory's grid.
pub fn weak_residual(traj: &Trajectory, p: &ParabolicProblem, v: &FEField, phi: &TimeProfile) -> Result<f64> {
    let g = traj.grid();
    if phi.value(g.end()).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "test profile must vanish at the final time, phi(T) = {}",
            phi.value(g.end())
        )));
    }
    if !traj.space().same_as(&p.space) || !v.space().same_as(&p.space) {
        return Err(Error::invalid("trajectory, test function and problem must share a space"));
    }
    let ops = Operators::new(&p.space, &p.coeffs, &p.f)?;
    let mv = ops.mass.matvec(v.values());
    let mut lhs = 0.0;
    let mut rhs = dot(&mv, p.u0.values()) * phi.value(g.start);
    for (k, w) in g.trapezoid_weights().into_iter().enumerate() {
        let t = g.node(k);
        let u = traj.values(k);
        let a = ops.form(t)?;
        lhs += w * (-dot(&mv, u) * phi.derivative(t) + a.bilinear(u, v.values()) * phi.value(t));
        rhs += w * dot(&ops.load(t)?, v.values()) * phi.value(t);
    }
    Ok((lhs - rhs).abs())
}

/// Defect of `(u(b)|v(b)) - (u(a)|v(a)) = ∫_a^b ⟨u', v⟩ + ⟨v', u⟩` for
/// piecewise-linear trajectories, integrated exactly node interval by node
/// interval.
pub fn integration_by_parts_check(u: &Trajectory, v: &Trajectory, a0: usize, b0: usize) -> Result<f64> {
    u.check_compatible(v)?;
    if a0 > b0 || b0 > u.grid().steps {
        return Err(Error::invalid(format!("need a0 <= b0 <= M, got {a0}, {b0}")));
    }
    let mass = assemble_mass(u.space())?;
    let ip = |x: &[f64], y: &[f64]| dot(&mass.matvec(x), y);
    let lhs = ip(u.values(b0), v.values(b0)) - ip(u.values(a0), v.values(a0));
    let mut rhs = 0.0;
    for k in a0..b0 {
        let (u0, u1) = (u.values(k), u.values(k + 1));
        let (v0, v1) = (v.values(k), v.values(k + 1));
        let du: Vec<f64> = u1.iter().zip(u0).map(|(a, b)| a - b).collect();
        let dv: Vec<f64> = v1.iter().zip(v0).map(|(a, b)| a - b).collect();
        let vm: Vec<f64> = v1.iter().zip(v0).map(|(a, b)| 0.5 * (a + b)).collect();
        let um: Vec<f64> = u1.iter().zip(u0).map(|(a, b)| 0.5 * (a + b)).collect();
        rhs += ip(&du, &vm) + ip(&dv, &um);
    }
    Ok((lhs - rhs).abs())
}

/// `‖u‖_{ℓ²(V)} / (‖u_0‖_H + ‖f‖_{ℓ²(V')})`, the measured constant of the
/// stability bound.
pub fn stability_ratio(traj: &Trajectory, p: &ParabolicProblem) -> Result<f64> {
    let norms = Norms::new(&p.space)?;
    let ops = Operators::new(&p.space, &p.coeffs, &p.f)?;
    let tau = p.grid.tau();
    let mut f_sq = 0.0;
    for k in 1..p.grid.n_nodes() {
        f_sq += tau * norms.dual_sq(&ops.load(p.grid.node(k))?)?;
    }
    let data = norms.h_sq(p.u0.values()).sqrt() + f_sq.sqrt();
    if data == 0.0 {
        return Err(Error::invalid("zero data: stability ratio undefined"));
    }
    Ok(traj.l2_v_norm_rect(&norms) / data)
}
