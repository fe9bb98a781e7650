use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use mosco_lab::fem::{estimate_form_constants, FEField, FunctionSpace, Norms};
use mosco_lab::mesh::{write_mesh_file, FamilyKind};
use mosco_lab::parabolic::{solve_parabolic, write_trajectory, ParabolicProblem, Trajectory};
use mosco_lab::seed::effective_seed;
use mosco_lab::study::run_study;
use mosco_lab::vi::{feasibility_report, solve_parabolic_vi_with, weak_vi_residual, ConvexConstraint, PgsOptions, VIProblem};
use mosco_lab::Result;
use serde_json::{json, Value};

use crate::config::{load_run_config, load_study_config, MeshSpec, RunConfig};
use crate::manifest::{RunManifest, Timings};

pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";

pub fn cmd_mesh(spec: &MeshSpec, out: &Path) -> Result<()> {
    let mesh = spec.build()?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_mesh_file(&mesh, out)
}

fn read_config(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

/// `sqrt(Σ w_k ‖u_k - I u(t_k)‖²_V)` and `max_k ‖u_k - I u(t_k)‖_H`.
fn exact_errors(traj: &Trajectory, exact: &mosco_lab::fem::Preset) -> Result<(f64, f64)> {
    let norms = Norms::new(traj.space())?;
    let grid = traj.grid();
    let mut l2v = 0.0;
    let mut sup = 0.0f64;
    for (k, w) in grid.trapezoid_weights().iter().enumerate() {
        let ex = FEField::from_preset(traj.space().clone(), exact, grid.node(k));
        let d: Vec<f64> = traj.values(k).iter().zip(ex.values()).map(|(a, b)| a - b).collect();
        l2v += w * norms.v_sq(&d);
        sup = sup.max(norms.h_sq(&d).sqrt());
    }
    Ok((l2v.sqrt(), sup))
}

pub fn cmd_solve(config: &Path, out: &Path) -> Result<()> {
    let mut timings = Timings::start();
    let cfg: RunConfig = load_run_config(&read_config(config)?)?;
    let seed = effective_seed(cfg.seed);
    let mut manifest = RunManifest::new("solve", serde_json::to_value(&cfg)?, seed);
    if let MeshSpec::File { path } = &cfg.mesh {
        manifest.hash_input(path)?;
    }
    let space = FunctionSpace::new(Arc::new(cfg.mesh.build()?), cfg.bc);
    let u0 = FEField::from_preset(space.clone(), &cfg.u0, cfg.grid.start);
    timings.stage("setup");

    let traj = match &cfg.obstacle {
        None => {
            let p = ParabolicProblem::new(space.clone(), cfg.coeffs.clone(), cfg.f.clone(), u0, cfg.grid)?
                .with_theta(cfg.theta)?;
            solve_parabolic(&p)?
        }
        Some(psi) => {
            let c = ConvexConstraint::from_preset(space.clone(), psi);
            let p = VIProblem::new(space.clone(), cfg.coeffs.clone(), cfg.f.clone(), u0, cfg.grid, c)?;
            let (traj, stats) = solve_parabolic_vi_with(&p, &PgsOptions::default())?;
            let sweeps: usize = stats.iter().map(|s| s.sweeps).sum();
            manifest.metrics.insert("pgs_sweeps".into(), json!(sweeps));
            manifest.metrics.insert(
                "min_margin".into(),
                json!(feasibility_report(&traj, &p.constraint)?.min_margin),
            );
            manifest.metrics.insert("weak_vi_residual".into(), json!(weak_vi_residual(&traj, &p, &traj)?));
            traj
        }
    };
    timings.stage("solve");

    let norms = Norms::new(&space)?;
    manifest.metrics.insert("n_dofs".into(), json!(space.n_dofs()));
    manifest.metrics.insert("l2v_norm".into(), json!(traj.l2_v_norm(&norms)));
    manifest.metrics.insert("sup_h_norm".into(), json!(traj.sup_h_norm(&norms)));
    if let Some(exact) = &cfg.exact {
        let (l2v, sup) = exact_errors(&traj, exact)?;
        manifest.metrics.insert("l2v_error".into(), json!(l2v));
        manifest.metrics.insert("sup_h_error".into(), json!(sup));
    }
    if cfg.estimate_constants {
        let k = estimate_form_constants(&space, &cfg.coeffs, (cfg.grid.start, cfg.grid.end()), 8, seed)?;
        manifest.metrics.insert("m_est".into(), json!(k.m_est));
        manifest.metrics.insert("alpha_est".into(), json!(k.alpha_est));
        manifest.metrics.insert("lambda_est".into(), json!(k.lambda_est));
    }
    timings.stage("metrics");

    fs::create_dir_all(out)?;
    for path in write_trajectory(&traj, out)? {
        manifest.add_output(out, &path);
    }
    manifest.write(out)?;
    timings.stage("write");
    timings.write(out)
}

pub fn cmd_study(config: &Path, out: &Path) -> Result<()> {
    let mut timings = Timings::start();
    let cfg = load_study_config(&read_config(config)?)?;
    let seed = effective_seed(cfg.seed);
    let mut manifest = RunManifest::new("study", serde_json::to_value(&cfg)?, seed);
    if let FamilyKind::Custom { members, limit } = &cfg.family.kind {
        for p in members.iter().chain(std::iter::once(limit)) {
            manifest.hash_input(&PathBuf::from(p))?;
        }
    }
    timings.stage("setup");

    let report = run_study(&cfg)?;
    timings.stage("study");

    fs::create_dir_all(out)?;
    let csv = out.join(REPORT_CSV);
    fs::write(&csv, report.to_csv())?;
    let mut json_text = serde_json::to_string_pretty(&report)?;
    json_text.push('\n');
    let json_path = out.join(REPORT_JSON);
    fs::write(&json_path, json_text)?;
    manifest.add_output(out, &csv);
    manifest.add_output(out, &json_path);
    manifest.metrics.insert("verdict".into(), Value::from(report.verdict.as_str()));
    manifest.metrics.insert("floor".into(), json!(report.floor));
    for s in &report.series {
        manifest.metrics.insert(format!("verdict_{}", s.norm.as_str()), Value::from(s.verdict.as_str()));
        manifest.metrics.insert(format!("rate_{}", s.norm.as_str()), json!(s.rate.rate));
    }
    manifest.write(out)?;
    timings.stage("write");
    timings.write(out)
}
