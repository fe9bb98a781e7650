use std::sync::Arc;

use mosco_lab::fem::{
    assemble_form, assemble_load, assemble_mass, BoundaryCondition, CoefficientSet, FEField,
    FunctionSpace, Preset,
};
use mosco_lab::mesh::{generate_rectangle, generate_unit_square};
use mosco_lab::parabolic::{solve_parabolic, weak_residual, ParabolicProblem, TimeGrid, TimeProfile, Trajectory};
use mosco_lab::vi::*;
use proptest::prelude::*;

fn square(h: f64) -> FunctionSpace {
    FunctionSpace::new(Arc::new(generate_unit_square(h).unwrap()), BoundaryCondition::Dirichlet)
}

fn bump(amplitude: f64) -> Preset {
    Preset::Bump {
        centre: [0.5, 0.5],
        radius: 0.45,
        amplitude,
    }
}

fn vi_problem(space: FunctionSpace, psi: Preset, u0: Preset, f: Preset, t: f64, m: usize) -> VIProblem {
    let constraint = ConvexConstraint::from_preset(space.clone(), &psi);
    let u0 = project_h(&constraint, &FEField::from_preset(space.clone(), &u0, 0.0)).unwrap();
    VIProblem::new(space, CoefficientSet::laplacian(), f, u0, TimeGrid::new(t, m).unwrap(), constraint).unwrap()
}

#[test]
fn projection_trivial_cases() {
    let s = square(0.25);
    let c = ConvexConstraint::new(FEField::zeros(s.clone()));
    let w = FEField::constant(s.clone(), 2.0);
    assert_eq!(project_h(&c, &w).unwrap().values(), w.values());
    let w = FEField::constant(s.clone(), -1.0);
    assert!(project_h(&c, &w).unwrap().values().iter().all(|&x| x == 0.0));
    let other = square(0.5);
    assert!(project_h(&c, &FEField::zeros(other)).is_err());
}

proptest! {
    #[test]
    fn projection_is_nodal_max(vals in proptest::collection::vec(-5.0f64..5.0, 9), psis in proptest::collection::vec(-5.0f64..5.0, 9)) {
        let s = square(0.25);
        let c = ConvexConstraint::new(FEField::new(s.clone(), psis.clone()).unwrap());
        let w = FEField::new(s, vals.clone()).unwrap();
        let p = project_h(&c, &w).unwrap();
        for i in 0..9 {
            prop_assert_eq!(p.values()[i], if vals[i] >= psis[i] { vals[i] } else { psis[i] });
        }
        let pp = project_h(&c, &p).unwrap();
        prop_assert_eq!(pp.values(), p.values());
    }
}

#[test]
fn inactive_obstacle_reproduces_parabolic_solution() {
    let s = square(0.1);
    let f = Preset::AffineX { c: 1.0, cx: -2.0, cy: 0.5 };
    let p = vi_problem(s.clone(), Preset::constant(-1e6), bump(1.0), f.clone(), 0.5, 20);
    let u_vi = solve_parabolic_vi(&p).unwrap();
    let q = ParabolicProblem::new(s.clone(), p.coeffs.clone(), f, p.u0.clone(), p.grid).unwrap();
    let u_par = solve_parabolic(&q).unwrap();
    let diff = u_vi
        .all_values()
        .iter()
        .flatten()
        .zip(u_par.all_values().iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-8, "{diff}");

    // the VI test value for v = u and the parabolic weak residual agree
    let phi = TimeProfile::ramp(&p.grid);
    let v = FEField::from_preset(s, &bump(1.0), 0.0);
    let r_vi = weak_residual(&u_vi, &q, &v, &phi).unwrap();
    let r_par = weak_residual(&u_par, &q, &v, &phi).unwrap();
    assert!((r_vi - r_par).abs() <= 1e-6);
    assert!(weak_vi_residual(&u_vi, &p, &u_vi).unwrap().abs() <= 1e-6);
}

#[test]
fn zero_data_on_zero_obstacle() {
    let p = vi_problem(square(0.2), Preset::zero(), Preset::zero(), Preset::zero(), 1.0, 5);
    let u = solve_parabolic_vi(&p).unwrap();
    assert!(u.all_values().iter().flatten().all(|&x| x == 0.0));
}

#[test]
fn solver_output_is_feasible_and_complementary() {
    let s = square(0.1);
    let mut coeffs = CoefficientSet::laplacian();
    coeffs.b_i = [Preset::constant(0.5), Preset::constant(0.2)];
    let psi = Preset::Sum {
        terms: vec![bump(0.4), Preset::constant(-0.1)],
    };
    let constraint = ConvexConstraint::from_preset(s.clone(), &psi);
    let u0 = project_h(&constraint, &FEField::from_preset(s.clone(), &bump(0.8), 0.0)).unwrap();
    let grid = TimeGrid::new(0.3, 15).unwrap();
    let p = VIProblem::new(s.clone(), coeffs, Preset::constant(-2.0), u0, grid, constraint.clone()).unwrap();
    let (u, stats) = solve_parabolic_vi_with(&p, &PgsOptions::default()).unwrap();
    let rep = feasibility_report(&u, &constraint).unwrap();
    assert!(rep.is_feasible() && rep.min_margin >= -1e-12);
    assert!(stats.iter().any(|s| s.outer > 1));

    let mass = assemble_mass(&s).unwrap();
    let a = assemble_form(&s, &p.coeffs, 0.0).unwrap();
    let b = assemble_load(&s, |x, t| p.f.eval(x, t), 0.0).unwrap();
    let tau = grid.tau();
    let lhs = mass.combine(1.0 / tau, &a, 1.0);
    let scale = vi_scale(&u).unwrap();
    let mut active = 0;
    for k in 1..=grid.steps {
        let mu = mass.matvec(u.values(k - 1));
        let r: Vec<f64> = lhs
            .matvec(u.values(k))
            .iter()
            .zip(&mu)
            .zip(&b)
            .map(|((l, m), b)| l - m / tau - b)
            .collect();
        assert!(r.iter().all(|&x| x >= -1e-8), "step {k}");
        let gap: f64 = r
            .iter()
            .zip(u.values(k))
            .zip(constraint.psi().values())
            .map(|((r, u), p)| r * (u - p))
            .sum();
        assert!(gap <= 1e-6 * scale);
        active += u.values(k).iter().zip(constraint.psi().values()).filter(|(a, b)| a == b).count();
    }
    assert!(active > 0);
    assert!(weak_vi_residual(&u, &p, &u).unwrap() >= -1e-6 * scale);
}

#[test]
fn feasibility_detects_unconstrained_violation() {
    let s = square(0.1);
    let q = ParabolicProblem::new(
        s.clone(),
        CoefficientSet::laplacian(),
        Preset::constant(-1.0),
        FEField::zeros(s.clone()),
        TimeGrid::new(0.5, 10).unwrap(),
    )
    .unwrap();
    let u = solve_parabolic(&q).unwrap();
    let c = ConvexConstraint::new(FEField::zeros(s.clone()));
    let rep = feasibility_report(&u, &c).unwrap();
    assert!(rep.min_margin < 0.0 && !rep.is_feasible());

    let psi = FEField::from_preset(s, &bump(1.0), 0.0);
    let c = ConvexConstraint::new(psi.clone());
    let rep = feasibility_report(&Trajectory::constant(&psi, q.grid), &c).unwrap();
    assert_eq!(rep.min_margin, 0.0);
}

#[test]
fn positive_perturbation_gives_nonnegative_value() {
    let s = square(0.1);
    let p = vi_problem(s.clone(), Preset::zero(), bump(0.5), Preset::constant(-1.0), 0.5, 20);
    let u = solve_parabolic_vi(&p).unwrap();
    let add = FEField::from_preset(s, &bump(0.3), 0.0);
    let v = u
        .map(|_, x| x.iter().zip(add.values()).map(|(a, b)| a + b).collect())
        .unwrap();
    let val = weak_vi_residual(&u, &p, &v).unwrap();
    assert!(val >= 0.0, "{val}");
    let below = u.map(|_, x| x.iter().map(|a| a - 1.0).collect()).unwrap();
    assert!(weak_vi_residual(&u, &p, &below).is_err());
}

#[test]
fn raising_the_obstacle_raises_the_solution() {
    let s = square(0.1);
    let lo = vi_problem(s.clone(), Preset::constant(-0.05), bump(0.5), Preset::constant(-1.0), 0.4, 20);
    let hi_psi = Preset::Sum {
        terms: vec![Preset::constant(-0.05), bump(0.2)],
    };
    let mut hi = vi_problem(s, hi_psi, bump(0.5), Preset::constant(-1.0), 0.4, 20);
    hi.u0 = project_h(&hi.constraint, &lo.u0).unwrap();
    let ul = solve_parabolic_vi(&lo).unwrap();
    let uh = solve_parabolic_vi(&hi).unwrap();
    for (a, b) in ul.all_values().iter().flatten().zip(uh.all_values().iter().flatten()) {
        assert!(b >= &(a - 1e-9));
    }
}

#[test]
fn thin_strip_active_set_matches_fine_oracle() {
    let height = 0.2;
    let u0 = Preset::Bump {
        centre: [0.6, 0.1],
        radius: 0.3,
        amplitude: 1.0,
    };
    let run = |h: f64| {
        let mesh = generate_rectangle(1.0, height, h, 0.4 * h).unwrap();
        let s = FunctionSpace::new(Arc::new(mesh), BoundaryCondition::Dirichlet);
        let p = vi_problem(s, Preset::zero(), u0.clone(), Preset::constant(-1.0), 0.02, 40);
        solve_parabolic_vi(&p).unwrap()
    };
    let hc = 0.05;
    let coarse = run(hc);
    let fine = run(hc / 2.0);
    let sc = coarse.space();
    let sf = fine.space();
    // coarse dof -> fine dof at the same point
    let pairs: Vec<(usize, usize)> = (0..sc.n_dofs())
        .filter_map(|d| {
            let x = sc.dof_point(d);
            (0..sf.n_dofs())
                .find(|&e| {
                    let y = sf.dof_point(e);
                    (y[0] - x[0]).abs() < 1e-12 && (y[1] - x[1]).abs() < 1e-12
                })
                .map(|e| (d, e))
        })
        .collect();
    assert_eq!(pairs.len(), sc.n_dofs());
    let mut partial_nodes = 0;
    for k in 0..=coarse.grid().steps {
        let ac: Vec<bool> = coarse.values(k).iter().map(|&x| x <= 1e-12).collect();
        let n_active = ac.iter().filter(|&&a| a).count();
        if n_active > 0 && n_active < ac.len() {
            partial_nodes += 1;
        }
        for &(d, e) in &pairs {
            let af = fine.values(k)[e] <= 1e-12;
            if ac[d] == af {
                continue;
            }
            // disagreement is only tolerated on the discrete free boundary
            let x = sc.dof_point(d);
            let on_interface = (0..sc.n_dofs()).any(|o| {
                let y = sc.dof_point(o);
                (y[0] - x[0]).abs() <= 1.01 * hc && (y[1] - x[1]).abs() <= 0.41 * hc && ac[o] != ac[d]
            });
            assert!(on_interface, "node {k}: active sets disagree at {x:?} away from the free boundary");
        }
    }
    assert!(partial_nodes >= 3);
    let final_active = coarse.last().values().iter().filter(|&&x| x <= 1e-12).count();
    assert!(final_active > 0);
}
