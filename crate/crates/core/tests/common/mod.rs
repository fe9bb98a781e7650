#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use mosco_lab::fem::quadrature::{map_point, ORDER5};
use mosco_lab::fem::{
    BoundaryCondition, CoefficientSet, FEField, FunctionSpace, Preset,
};
use mosco_lab::mesh::{generate_unit_square, Point};
use mosco_lab::parabolic::{solve_parabolic, ParabolicProblem, TimeGrid, Trajectory};

/// `∫ |∇(u_h - u)|² + (u_h - u)²` with the degree-5 rule.
pub fn h1_error_sq(field: &FEField, u: impl Fn(Point) -> f64, grad: impl Fn(Point) -> [f64; 2]) -> f64 {
    let mesh = field.space().mesh();
    let mut acc = 0.0;
    for t in 0..mesh.n_triangles() {
        let pts = mesh.triangle_points(t);
        let area = mesh.signed_area(t);
        let vals = field.triangle_values(t);
        let g = field.gradient_on(t);
        for (b, w) in ORDER5.bary.iter().zip(ORDER5.weights) {
            let x = map_point(&pts, b);
            let uh = b[0] * vals[0] + b[1] * vals[1] + b[2] * vals[2];
            let gu = grad(x);
            acc += w * area * ((uh - u(x)).powi(2) + (g[0] - gu[0]).powi(2) + (g[1] - gu[1]).powi(2));
        }
    }
    acc
}

pub fn exact_heat(x: Point, t: f64) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin() * (-t).exp()
}

pub fn exact_heat_grad(x: Point, t: f64) -> [f64; 2] {
    let e = (-t).exp();
    [
        PI * (PI * x[0]).cos() * (PI * x[1]).sin() * e,
        PI * (PI * x[0]).sin() * (PI * x[1]).cos() * e,
    ]
}

/// `u_t - Δu` for the manufactured solution.
pub fn heat_source() -> Preset {
    Preset::product(vec![
        Preset::constant(2.0 * PI * PI - 1.0),
        Preset::Sine { axis: 0, freq: PI, phase: 0.0 },
        Preset::Sine { axis: 1, freq: PI, phase: 0.0 },
        Preset::ExpT { scale: 1.0, rate: -1.0 },
    ])
}

pub fn heat_problem(h: f64, tau: f64, t_final: f64) -> ParabolicProblem {
    let mesh = Arc::new(generate_unit_square(h).unwrap());
    let space = FunctionSpace::new(mesh, BoundaryCondition::Dirichlet);
    let u0 = FEField::interpolate(space.clone(), |x| exact_heat(x, 0.0));
    let steps = (t_final / tau).round() as usize;
    let grid = TimeGrid::new(t_final, steps).unwrap();
    ParabolicProblem::new(space, CoefficientSet::laplacian(), heat_source(), u0, grid).unwrap()
}

/// `L²(0,T;H¹)` error against the manufactured solution (trapezoidal in time).
pub fn heat_error(traj: &Trajectory) -> f64 {
    let g = traj.grid();
    g.trapezoid_weights()
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let t = g.node(k);
            w * h1_error_sq(&traj.field(k), |x| exact_heat(x, t), |x| exact_heat_grad(x, t))
        })
        .sum::<f64>()
        .sqrt()
}

pub fn manufactured_errors(t_final: f64) -> Vec<f64> {
    [(0.1, 0.01), (0.05, 0.005), (0.025, 0.0025)]
        .iter()
        .map(|&(h, tau)| heat_error(&solve_parabolic(&heat_problem(h, tau, t_final)).unwrap()))
        .collect()
}
