use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::report::FLOOR_REL;
use super::{ConvergenceReport, StudyConfig, StudyKind};
use crate::error::{Error, Result};
use crate::fem::{BoundaryCondition, FEField, FunctionSpace, Norms, Preset};
use crate::mesh::{FamilyKind, DUMBBELL_HANDLE_HALF_LENGTH};
use crate::mosco::{embed_trajectory, m1_defect_time, DGrid, EmbedKind, EmbeddedField, SplitSq, TransferPlan};
use crate::parabolic::{solve_parabolic, ParabolicProblem, Trajectory};
use crate::seed::effective_seed;
use crate::vi::{feasibility_report, solve_parabolic_vi, vi_scale, weak_vi_residual, ConvexConstraint, VIProblem};

/// Runs the study selected by `cfg.bc`, on a dedicated pool of `cfg.jobs`
/// threads when given.
pub fn run_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let go = || match cfg.bc {
        StudyKind::Dirichlet => run_dirichlet_study(cfg),
        StudyKind::Neumann => run_neumann_study(cfg),
        StudyKind::Vi => run_vi_study(cfg),
    };
    match cfg.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?
            .install(go),
        None => go(),
    }
}

pub fn run_dirichlet_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    expect_kind(cfg, StudyKind::Dirichlet)?;
    domain_study(cfg, BoundaryCondition::Dirichlet)
}

pub fn run_neumann_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    expect_kind(cfg, StudyKind::Neumann)?;
    domain_study(cfg, BoundaryCondition::Neumann)
}

fn expect_kind(cfg: &StudyConfig, kind: StudyKind) -> Result<()> {
    cfg.validate()?;
    if cfg.bc != kind {
        return Err(Error::invalid(format!(
            "config has bc = {}, expected {}",
            cfg.bc.as_str(),
            kind.as_str()
        )));
    }
    Ok(())
}

/// Time-integrated and sup-in-time error norms from per-node squared
/// distances.
struct Errors {
    l2h1: f64,
    cl2: f64,
    grad: f64,
    l2l2: f64,
}

impl Errors {
    fn from_nodes(d: &[SplitSq], weights: &[f64], sup_mask: &[bool]) -> Self {
        let mut s = SplitSq::default();
        let mut sup = 0.0f64;
        for ((x, w), &m) in d.iter().zip(weights).zip(sup_mask) {
            s.value += w * x.value;
            s.grad += w * x.grad;
            if m {
                sup = sup.max(x.value);
            }
        }
        Errors {
            l2h1: s.total().sqrt(),
            cl2: sup.sqrt(),
            grad: s.grad.sqrt(),
            l2l2: s.value.sqrt(),
        }
    }
}

fn sup_mask(cfg: &StudyConfig) -> Vec<bool> {
    let from = cfg.weak_data_from.unwrap_or(f64::NEG_INFINITY);
    cfg.grid.nodes().iter().map(|&t| t >= from - 1e-12).collect()
}

fn check_coefficients(cfg: &StudyConfig, space: &FunctionSpace) -> Result<()> {
    if cfg.check_coefficients {
        cfg.coeffs
            .check_hypotheses(space.mesh(), &cfg.grid.nodes(), effective_seed(cfg.seed))?;
    }
    Ok(())
}

fn solve_on(cfg: &StudyConfig, space: &FunctionSpace, u0: &Preset, f: &Preset) -> Result<Trajectory> {
    let u0 = FEField::from_preset(space.clone(), u0, cfg.grid.start);
    let p = ParabolicProblem::new(space.clone(), cfg.coeffs.clone(), f.clone(), u0, cfg.grid)?;
    solve_parabolic(&p)
}

fn node_distances(a: &[EmbeddedField], b: &[EmbeddedField], grid: &DGrid) -> Vec<SplitSq> {
    a.iter().zip(b).map(|(x, y)| x.distance_sq(y, grid)).collect()
}

/// `sqrt(∫_0^T ∫_handle |∇u|²)` for dumbbell members.
fn handle_flux(u: &Trajectory, weights: &[f64]) -> f64 {
    let mesh = u.space().mesh();
    let handle: Vec<(usize, f64)> = (0..mesh.n_triangles())
        .filter(|&t| mesh.centroid(t)[0].abs() < DUMBBELL_HANDLE_HALF_LENGTH)
        .map(|t| (t, mesh.signed_area(t).abs()))
        .collect();
    let mut s = 0.0;
    for (k, w) in weights.iter().enumerate() {
        let field = u.field(k);
        for &(t, area) in &handle {
            let g = field.gradient_on(t);
            s += w * area * (g[0] * g[0] + g[1] * g[1]);
        }
    }
    s.sqrt()
}

struct MemberResult {
    errors: Errors,
    norm: f64,
    handle_flux: Option<f64>,
    defect: Option<f64>,
}

fn domain_study(cfg: &StudyConfig, bc: BoundaryCondition) -> Result<ConvergenceReport> {
    let kind = EmbedKind::for_bc(bc);
    let limit_mesh = Arc::new(cfg.family.limit()?);
    let grid = Arc::new(DGrid::new(limit_mesh.holdall_radius(), cfg.grid_cells)?);
    let limit_space = FunctionSpace::new(limit_mesh, bc);
    check_coefficients(cfg, &limit_space)?;

    let limit = solve_on(cfg, &limit_space, &cfg.data.u0, &cfg.data.f)?;
    let limit_emb = embed_trajectory(&limit, kind, &grid)?;
    let weights = cfg.grid.trapezoid_weights();
    let mask = sup_mask(cfg);

    let self_plan = TransferPlan::new(&limit_space, &limit_space, grid.clone())?;
    let round_trip = (0..cfg.grid.n_nodes())
        .into_par_iter()
        .map(|k| self_plan.embed_target(&self_plan.interpolate(&limit.field(k))?, kind))
        .collect::<Result<Vec<_>>>()?;
    let self_dist = Errors::from_nodes(&node_distances(&round_trip, &limit_emb, &grid), &weights, &mask);
    let zero: Vec<SplitSq> = limit_emb.iter().map(|e| e.norm_sq(&grid)).collect();
    let scale = Errors::from_nodes(&zero, &weights, &mask).l2h1;
    let floor = self_dist.l2h1.max(self_dist.cl2) + FLOOR_REL * (1.0 + scale);

    let params = cfg.family.params();
    let dumbbell = matches!(cfg.family.kind, FamilyKind::Dumbbell);
    let members = (1..=params.len())
        .into_par_iter()
        .map(|n| {
            let run = || -> Result<MemberResult> {
                let space = FunctionSpace::new(Arc::new(cfg.family.member(n)?), bc);
                let (u0, f) = cfg.data.member(params[n - 1]);
                let u = solve_on(cfg, &space, &u0, &f)?;
                let emb = embed_trajectory(&u, kind, &grid)?;
                let own: Vec<SplitSq> = emb.iter().map(|e| e.norm_sq(&grid)).collect();
                let defect = if cfg.defects {
                    let plan = TransferPlan::new(&limit_space, &space, grid.clone())?;
                    Some(m1_defect_time(&limit, None, kind, &plan)?)
                } else {
                    None
                };
                Ok(MemberResult {
                    errors: Errors::from_nodes(&node_distances(&emb, &limit_emb, &grid), &weights, &mask),
                    norm: Errors::from_nodes(&own, &weights, &mask).l2h1,
                    handle_flux: dumbbell.then(|| handle_flux(&u, &weights)),
                    defect,
                })
            };
            run().map_err(|e| e.at_index(n))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("solution_norm".to_string(), members.iter().map(|m| m.norm).collect());
    diagnostics.insert("limit_norm".to_string(), vec![scale]);
    if dumbbell {
        diagnostics.insert(
            "handle_flux".to_string(),
            members.iter().map(|m| m.handle_flux.unwrap_or(0.0)).collect(),
        );
    }
    if cfg.defects {
        diagnostics.insert(
            "m1_defect_time".to_string(),
            members.iter().map(|m| m.defect.unwrap_or(0.0)).collect(),
        );
    }
    Ok(ConvergenceReport::assemble(
        cfg.bc,
        params,
        &cfg.norms(),
        [
            members.iter().map(|m| m.errors.l2h1).collect(),
            members.iter().map(|m| m.errors.cl2).collect(),
            members.iter().map(|m| m.errors.grad).collect(),
            members.iter().map(|m| m.errors.l2l2).collect(),
        ],
        floor,
        diagnostics,
    ))
}

/// The obstacle problem for shift `s`: `ψ + s`, with `u0` lifted onto the
/// shifted obstacle.
fn vi_problem(cfg: &StudyConfig, space: &FunctionSpace, psi: &FEField, s: f64, p: f64) -> Result<VIProblem> {
    let psi_s: Vec<f64> = psi.values().iter().map(|v| v + s).collect();
    let constraint = ConvexConstraint::new(FEField::new(space.clone(), psi_s.clone())?);
    let (u0, f) = cfg.data.member(p);
    let mut u0 = FEField::from_preset(space.clone(), &u0, cfg.grid.start);
    for (u, q) in u0.values_mut().iter_mut().zip(&psi_s) {
        *u = u.max(*q);
    }
    VIProblem::new(space.clone(), cfg.coeffs.clone(), f, u0, cfg.grid, constraint)
}

struct ViMember {
    errors: Errors,
    norm: f64,
    margin: f64,
    residual: f64,
    scale: f64,
}

pub fn run_vi_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    expect_kind(cfg, StudyKind::Vi)?;
    let obstacle = cfg.obstacle.as_ref().expect("validated");
    let space = FunctionSpace::new(Arc::new(cfg.family.limit()?), obstacle.space_bc);
    check_coefficients(cfg, &space)?;
    let norms = Norms::new(&space)?;
    let psi = FEField::from_preset(space.clone(), &obstacle.psi, cfg.grid.start);
    let weights = cfg.grid.trapezoid_weights();
    let mask = sup_mask(cfg);

    let limit_problem = vi_problem(cfg, &space, &psi, 0.0, 0.0)?;
    let limit = solve_parabolic_vi(&limit_problem)?;
    let distances = |u: &Trajectory| -> Vec<SplitSq> {
        (0..cfg.grid.n_nodes())
            .map(|k| {
                let d: Vec<f64> = u.values(k).iter().zip(limit.values(k)).map(|(a, b)| a - b).collect();
                let value = norms.h_sq(&d);
                SplitSq {
                    value,
                    grad: (norms.v_sq(&d) - value).max(0.0),
                }
            })
            .collect()
    };
    let limit_norm = limit.l2_v_norm(&norms);
    let floor = FLOOR_REL * (1.0 + limit_norm);

    let params = cfg.family.params();
    let shifts = cfg.shifts();
    let members = (1..=params.len())
        .into_par_iter()
        .map(|n| {
            let run = || -> Result<ViMember> {
                let p = vi_problem(cfg, &space, &psi, shifts[n - 1], params[n - 1])?;
                let u = solve_parabolic_vi(&p)?;
                Ok(ViMember {
                    errors: Errors::from_nodes(&distances(&u), &weights, &mask),
                    norm: u.l2_v_norm(&norms),
                    margin: feasibility_report(&u, &p.constraint)?.min_margin,
                    residual: weak_vi_residual(&u, &p, &u)?,
                    scale: vi_scale(&u)?,
                })
            };
            run().map_err(|e| e.at_index(n))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("solution_norm".to_string(), members.iter().map(|m| m.norm).collect());
    diagnostics.insert("limit_norm".to_string(), vec![limit_norm]);
    diagnostics.insert(
        "limit_min_margin".to_string(),
        vec![feasibility_report(&limit, &limit_problem.constraint)?.min_margin],
    );
    diagnostics.insert(
        "limit_weak_vi_residual".to_string(),
        vec![weak_vi_residual(&limit, &limit_problem, &limit)?],
    );
    diagnostics.insert("limit_vi_scale".to_string(), vec![vi_scale(&limit)?]);
    diagnostics.insert(
        "boundedness_ratio".to_string(),
        members.iter().map(|m| m.norm / limit_norm.max(1e-300)).collect(),
    );
    diagnostics.insert("min_margin".to_string(), members.iter().map(|m| m.margin).collect());
    diagnostics.insert("weak_vi_residual".to_string(), members.iter().map(|m| m.residual).collect());
    diagnostics.insert("vi_scale".to_string(), members.iter().map(|m| m.scale).collect());
    diagnostics.insert("obstacle_shift".to_string(), shifts);
    Ok(ConvergenceReport::assemble(
        cfg.bc,
        params,
        &cfg.norms(),
        [
            members.iter().map(|m| m.errors.l2h1).collect(),
            members.iter().map(|m| m.errors.cl2).collect(),
            members.iter().map(|m| m.errors.grad).collect(),
            members.iter().map(|m| m.errors.l2l2).collect(),
        ],
        floor,
        diagnostics,
    ))
}
