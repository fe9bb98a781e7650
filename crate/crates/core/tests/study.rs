use std::sync::Arc;

use mosco_lab::fem::{coercivity_at, BoundaryCondition, CoefficientSet, FunctionSpace, Preset};
use mosco_lab::mesh::{generate_disk, write_mesh_file, DomainFamily, FamilyKind};
use mosco_lab::parabolic::TimeGrid;
use mosco_lab::study::*;
use mosco_lab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> TimeGrid {
    TimeGrid::new(0.25, 10).unwrap()
}

fn heat(family: DomainFamily, bc: StudyKind) -> StudyConfig {
    StudyConfig::new(family, bc, StudyData::new(Preset::zero(), Preset::constant(1.0)), grid())
}

fn neumann_cfg(family: DomainFamily) -> StudyConfig {
    let f = Preset::AffineX { c: 0.0, cx: 0.0, cy: 1.0 };
    StudyConfig::new(family, StudyKind::Neumann, StudyData::new(Preset::zero(), f), grid())
}

fn square(c: f64, axis: usize) -> Preset {
    let (cx, cy) = if axis == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
    let l = Preset::AffineX { c: -c, cx, cy };
    Preset::product(vec![l.clone(), l])
}

/// `a (0.2 - |x - (1/2, 1/2)|²)`.
fn cap(a: f64) -> Preset {
    Preset::Sum {
        terms: vec![
            Preset::constant(0.2 * a),
            Preset::product(vec![
                Preset::constant(-a),
                Preset::Sum {
                    terms: vec![square(0.5, 0), square(0.5, 1)],
                },
            ]),
        ],
    }
}

fn vi_cfg(h: f64, shifts: Option<Vec<f64>>) -> StudyConfig {
    let mut cfg = StudyConfig::new(
        DomainFamily::new(FamilyKind::UnitSquare, h, 6),
        StudyKind::Vi,
        StudyData::new(Preset::zero(), Preset::constant(-1.0)),
        grid(),
    );
    cfg.obstacle = Some(ObstacleSpec {
        psi: cap(40.0),
        shifts,
        space_bc: BoundaryCondition::Dirichlet,
    });
    cfg
}

fn strictly_decreasing(e: &[f64]) -> bool {
    e.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn repeated_limit_is_at_floor() {
    for bc in [StudyKind::Dirichlet, StudyKind::Neumann] {
        let cfg = heat(DomainFamily::cracked_disk(0.1, 3).repeated_limit(), bc);
        let r = run_study(&cfg).unwrap();
        assert!(r.floor > 0.0 && r.floor < 1e-9, "floor {}", r.floor);
        for nk in [NormKind::L2H1, NormKind::CL2, NormKind::Grad, NormKind::L2L2] {
            assert!(r.errors(nk).iter().all(|&e| e <= r.floor), "{bc:?} {nk:?}");
        }
        assert_eq!(r.verdict, Verdict::DecreasingToFloor);
        assert!(r.series.iter().all(|s| s.rate.rate.is_none()));
    }
}

#[test]
fn cracked_disk_dirichlet_decreases() {
    let r = run_study(&heat(DomainFamily::cracked_disk(0.08, 6), StudyKind::Dirichlet)).unwrap();
    assert_eq!(r.verdict, Verdict::DecreasingToFloor);
    for nk in [NormKind::L2H1, NormKind::CL2] {
        let e = r.errors(nk);
        assert!(strictly_decreasing(e), "{nk:?}: {e:?}");
        assert!(e[5] <= 0.3 * e[0], "{nk:?}: {e:?}");
        let rate = r.series(nk).unwrap().rate.rate.unwrap();
        assert!(rate > 0.2, "{nk:?} rate {rate}");
    }
    let locked_l2h1 = [
        8.835685402e-2,
        6.350477471e-2,
        4.487457723e-2,
        3.203462717e-2,
        2.314820204e-2,
        1.458047188e-2,
    ];
    for (e, l) in r.err_l2h1.iter().zip(locked_l2h1) {
        assert!((e - l).abs() <= 1e-6 * l, "regression: {e} vs {l}");
    }
}

#[test]
fn cracked_disk_neumann_decreases() {
    let r = run_study(&neumann_cfg(DomainFamily::cracked_disk(0.08, 6))).unwrap();
    assert_eq!(r.verdict, Verdict::DecreasingToFloor);
    for nk in [NormKind::L2L2, NormKind::Grad, NormKind::CL2] {
        assert!(strictly_decreasing(r.errors(nk)), "{nk:?}: {:?}", r.errors(nk));
    }
}

#[test]
fn dumbbell_neumann_reports_handle_flux() {
    let family = DomainFamily::new(FamilyKind::Dumbbell, 0.1, 4);
    let mut cfg = neumann_cfg(family);
    cfg.data = StudyData::new(Preset::AffineX { c: 0.0, cx: 1.0, cy: 0.0 }, Preset::zero());
    let r = run_study(&cfg).unwrap();
    assert!(strictly_decreasing(&r.err_l2l2), "{:?}", r.err_l2l2);
    let flux = &r.diagnostics["handle_flux"];
    assert_eq!(flux.len(), 4);
    assert!(flux.iter().all(|&f| f > 0.0));
    assert!(strictly_decreasing(flux), "{flux:?}");
}

#[test]
fn fixed_hole_is_stagnant() {
    let bump = Preset::Bump {
        centre: [0.0, 0.0],
        radius: 0.5,
        amplitude: 1.0,
    };
    let family = DomainFamily::new(FamilyKind::FixedHole { radius: 0.25 }, 0.1, 4);
    let mut cfg = StudyConfig::new(family, StudyKind::Dirichlet, StudyData::new(bump.clone(), bump), grid());
    cfg.defects = true;
    let r = run_study(&cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Stagnant);
    assert!(r.series.iter().all(|s| s.verdict == Verdict::Stagnant));
    for e in [&r.err_l2h1, &r.err_cl2, &r.diagnostics["m1_defect_time"]] {
        assert!(e[0] > 1e-2);
        assert!(e.iter().all(|&x| x >= 0.5 * e[0]), "{e:?}");
    }
}

#[test]
fn vi_shifted_obstacles() {
    let r = run_study(&vi_cfg(0.05, None)).unwrap();
    assert_eq!(r.verdict, Verdict::DecreasingToFloor);
    assert!(strictly_decreasing(&r.err_l2h1));
    assert!(r.err_l2h1[5] <= 0.1 * r.err_l2h1[0]);
    let rate = r.series(NormKind::L2H1).unwrap().rate.rate.unwrap();
    assert!((rate - 1.0).abs() < 0.1, "rate {rate}");
    assert!(r.diagnostics["boundedness_ratio"].iter().all(|b| (b - 1.0).abs() <= 0.1));
    assert!(r.diagnostics["min_margin"].iter().all(|&m| m >= -1e-12));
    for (res, scale) in r.diagnostics["weak_vi_residual"].iter().zip(&r.diagnostics["vi_scale"]) {
        assert!(*res >= -1e-6 * scale);
    }
}

#[test]
fn vi_trivial_families() {
    let same = run_study(&vi_cfg(0.1, Some(vec![0.0; 6]))).unwrap();
    assert!(same.err_l2h1.iter().all(|&e| e <= same.floor));
    assert_eq!(same.verdict, Verdict::DecreasingToFloor);

    let gap = run_study(&vi_cfg(0.1, Some(vec![1.0; 6]))).unwrap();
    assert_eq!(gap.verdict, Verdict::Stagnant);
    assert!(gap.err_l2h1.iter().all(|&e| e > 0.1 && e == gap.err_l2h1[0]));
}

#[test]
fn fit_rate_examples() {
    let p: Vec<f64> = (1..=8).map(|n| 2f64.powi(-n)).collect();
    let r = fit_rate(&p, &p, 0.0);
    assert!((r.rate.unwrap() - 1.0).abs() <= 1e-12);
    assert!((r.r2.unwrap() - 1.0).abs() <= 1e-12);
    let sq: Vec<f64> = p.iter().map(|x| x * x).collect();
    assert!((fit_rate(&p, &sq, 0.0).rate.unwrap() - 2.0).abs() <= 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let p: Vec<f64> = (1..=10).map(|n| 2f64.powi(-n)).collect();
    let noisy: Vec<f64> = p
        .iter()
        .map(|x| 3.0 * x.powf(1.5) * rng.random_range(-0.1f64..0.1).exp())
        .collect();
    let r = fit_rate(&p, &noisy, 0.0);
    assert!((r.rate.unwrap() - 1.5).abs() <= 0.1, "{r:?}");
    assert_eq!(r.points, 10);

    let r = fit_rate(&p[..4], &[1.0, 0.5, 1e-12, 1e-13], 1e-10);
    assert_eq!(r.rate, None);
    assert_eq!(r.points, 2);
}

#[test]
fn reports_are_deterministic() {
    let mut cfg = heat(DomainFamily::cracked_disk(0.1, 4), StudyKind::Dirichlet);
    let a = run_study(&cfg).unwrap();
    let b = run_study(&cfg).unwrap();
    cfg.jobs = Some(1);
    let c = run_study(&cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_csv(), c.to_csv());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    assert_eq!(a, c);
}

#[test]
fn data_perturbation_is_stable() {
    let family = DomainFamily::cracked_disk(0.1, 4);
    let base = heat(family.clone(), StudyKind::Dirichlet);
    let mut pert = base.clone();
    pert.data.f_perturbation = Some(Preset::constant(1.0));
    let rb = run_study(&base).unwrap();
    let rp = run_study(&pert).unwrap();
    let t = base.grid.end();
    for n in 1..=family.len() {
        let mesh = Arc::new(family.member(n).unwrap());
        let area = mesh.area();
        let space = FunctionSpace::new(mesh, BoundaryCondition::Dirichlet);
        let alpha = coercivity_at(&space, &CoefficientSet::laplacian(), 0.0, 0.0).unwrap();
        let gap = rb.params[n - 1] * (t * area).sqrt();
        let change = (rp.err_l2h1[n - 1] - rb.err_l2h1[n - 1]).abs();
        assert!(change <= 1.05 * gap / alpha, "n = {n}: {change} > {gap}/{alpha}");
        assert!(change > 0.0);
    }
}

#[test]
fn member_errors_carry_the_index() {
    let dir = std::env::temp_dir().join(format!("mosco-lab-study-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let limit = dir.join("limit.mesh2d");
    write_mesh_file(&generate_disk(0.125).unwrap(), &limit).unwrap();
    let family = DomainFamily::new(
        FamilyKind::Custom {
            members: vec![limit.display().to_string(), dir.join("missing.mesh2d").display().to_string()],
            limit: limit.display().to_string(),
        },
        0.125,
        2,
    );
    let err = run_study(&heat(family, StudyKind::Dirichlet)).unwrap_err();
    assert!(matches!(err, Error::FamilyMember { index: 2, .. }), "{err}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_json_round_trip_and_validation() {
    let cfg = vi_cfg(0.1, Some(vec![1.0; 6]));
    let back = StudyConfig::from_json(&cfg.to_json().unwrap()).unwrap();
    assert_eq!(back, cfg);

    let minimal = r#"{"family": {"kind": "cracked_disk", "h": 0.1, "n_max": 3},
        "bc": "dirichlet", "data": {"f": {"preset": "constant", "value": 1.0}},
        "grid": {"T": 0.25, "M": 10}}"#;
    let cfg = StudyConfig::from_json(minimal).unwrap();
    assert_eq!(cfg.coeffs, CoefficientSet::laplacian());
    assert_eq!(cfg.norms(), vec![NormKind::L2H1, NormKind::CL2]);

    let mut bad = vi_cfg(0.1, None);
    bad.obstacle = None;
    assert!(matches!(run_study(&bad), Err(Error::InvalidInput(_))));
    let mut bad = vi_cfg(0.1, Some(vec![0.1; 3]));
    assert!(bad.validate().is_err());
    bad.obstacle = None;
    bad.bc = StudyKind::Dirichlet;
    bad.weak_data_from = Some(5.0);
    assert!(bad.validate().is_err());
    let d = heat(DomainFamily::cracked_disk(0.1, 3), StudyKind::Dirichlet);
    assert!(matches!(run_neumann_study(&d), Err(Error::InvalidInput(_))));
}

#[test]
fn weak_data_variant_restricts_sup_norm() {
    let mut cfg = heat(DomainFamily::cracked_disk(0.1, 3), StudyKind::Dirichlet);
    cfg.data.u0_perturbation = Some(Preset::Bump {
        centre: [0.5, 0.3],
        radius: 0.2,
        amplitude: 50.0,
    });
    let full = run_study(&cfg).unwrap();
    cfg.weak_data_from = Some(0.1);
    let weak = run_study(&cfg).unwrap();
    assert_eq!(full.err_l2h1, weak.err_l2h1);
    for (w, f) in weak.err_cl2.iter().zip(&full.err_cl2) {
        assert!(w < f);
    }
}
