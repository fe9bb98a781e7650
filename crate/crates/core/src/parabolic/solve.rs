use std::borrow::Cow;

use super::{TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_form, assemble_load, assemble_mass, solve_linear, CoefficientSet, FEField,
    FunctionSpace, Preset, SparseMatrix, DEFAULT_TOL,
};

/// `u' + A(t) u = f(t)` on `grid`, `u(start) = u0`, discretised by the
/// θ-scheme.
#[derive(Debug, Clone)]
pub struct ParabolicProblem {
    pub space: FunctionSpace,
    pub coeffs: CoefficientSet,
    pub f: Preset,
    pub u0: FEField,
    pub grid: TimeGrid,
    pub theta: f64,
}

impl ParabolicProblem {
    /// Implicit Euler problem.
    pub fn new(
        space: FunctionSpace,
        coeffs: CoefficientSet,
        f: Preset,
        u0: FEField,
        grid: TimeGrid,
    ) -> Result<Self> {
        let p = ParabolicProblem {
            space,
            coeffs,
            f,
            u0,
            grid,
            theta: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        self.theta = theta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::invalid(format!("theta must lie in [1/2, 1], got {}", self.theta)));
        }
        if !self.u0.space().same_as(&self.space) {
            return Err(Error::invalid("u0 does not live on the problem space"));
        }
        Ok(())
    }
}

/// Mass matrix plus time-dependent form and load with caching for
/// autonomous data.
pub(crate) struct Operators<'a> {
    space: &'a FunctionSpace,
    coeffs: &'a CoefficientSet,
    f: &'a Preset,
    pub mass: SparseMatrix,
    form_cache: Option<SparseMatrix>,
    load_cache: Option<Vec<f64>>,
}

impl<'a> Operators<'a> {
    pub fn new(space: &'a FunctionSpace, coeffs: &'a CoefficientSet, f: &'a Preset) -> Result<Self> {
        let mut ops = Operators {
            space,
            coeffs,
            f,
            mass: assemble_mass(space)?,
            form_cache: None,
            load_cache: None,
        };
        if !coeffs.depends_on_time() {
            ops.form_cache = Some(assemble_form(space, coeffs, 0.0)?);
        }
        if !f.depends_on_time() {
            ops.load_cache = Some(ops.assemble_load(0.0)?);
        }
        Ok(ops)
    }

    pub fn is_autonomous(&self) -> bool {
        self.form_cache.is_some()
    }

    pub fn form(&self, t: f64) -> Result<Cow<'_, SparseMatrix>> {
        match &self.form_cache {
            Some(a) => Ok(Cow::Borrowed(a)),
            None => Ok(Cow::Owned(assemble_form(self.space, self.coeffs, t)?)),
        }
    }

    pub fn load(&self, t: f64) -> Result<Cow<'_, [f64]>> {
        match &self.load_cache {
            Some(b) => Ok(Cow::Borrowed(b.as_slice())),
            None => Ok(Cow::Owned(self.assemble_load(t)?)),
        }
    }

    fn assemble_load(&self, t: f64) -> Result<Vec<f64>> {
        if self.f.is_zero() {
            return Ok(vec![0.0; self.space.n_dofs()]);
        }
        assemble_load(self.space, |x, t| self.f.eval(x, t), t)
    }
}

/// Runs the θ-scheme
/// `(M/τ + θ A(t_{k+1})) u^{k+1} = (M/τ − (1−θ) A(t_k)) u^k + θ b(t_{k+1}) + (1−θ) b(t_k)`.
pub fn solve_parabolic(p: &ParabolicProblem) -> Result<Trajectory> {
    p.validate()?;
    let ops = Operators::new(&p.space, &p.coeffs, &p.f)?;
    let g = &p.grid;
    let tau = g.tau();
    let theta = p.theta;
    let fixed_lhs = if ops.is_autonomous() {
        Some(ops.mass.combine(1.0 / tau, &*ops.form(0.0)?, theta))
    } else {
        None
    };
    let mut values = Vec::with_capacity(g.n_nodes());
    let mut u = p.u0.values().to_vec();
    values.push(u.clone());
    let mut a_prev = ops.form(g.node(0))?;
    let mut b_prev = ops.load(g.node(0))?;
    for k in 0..g.steps {
        let step = k + 1;
        let t1 = g.node(step);
        let a_next = ops.form(t1).map_err(|e| e.at_step(step))?;
        let b_next = ops.load(t1).map_err(|e| e.at_step(step))?;
        let mut rhs = ops.mass.matvec(&u);
        rhs.iter_mut().for_each(|r| *r /= tau);
        if theta < 1.0 {
            let au = a_prev.matvec(&u);
            for i in 0..rhs.len() {
                rhs[i] += -(1.0 - theta) * au[i] + (1.0 - theta) * b_prev[i];
            }
        }
        for i in 0..rhs.len() {
            rhs[i] += theta * b_next[i];
        }
        let lhs = match &fixed_lhs {
            Some(l) => Cow::Borrowed(l),
            None => Cow::Owned(ops.mass.combine(1.0 / tau, &a_next, theta)),
        };
        u = crate::fem::solve_linear_from(&lhs, &rhs, u, DEFAULT_TOL).map_err(|e| e.at_step(step))?;
        values.push(u.clone());
        a_prev = a_next;
        b_prev = b_next;
    }
    Trajectory::new(p.space.clone(), *g, values)
}

/// Single elliptic solve used by tests and recovery: `A(t) u = b(t)`.
pub fn solve_stationary(space: &FunctionSpace, coeffs: &CoefficientSet, f: &Preset, t: f64) -> Result<FEField> {
    let a = assemble_form(space, coeffs, t)?;
    let b = assemble_load(space, |x, t| f.eval(x, t), t)?;
    FEField::new(space.clone(), solve_linear(&a, &b, DEFAULT_TOL)?)
}
