use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use super::{embed_with, DGrid, EmbedKind, EmbeddedField, Sampler};
use crate::error::{Error, Result};
use crate::fem::quadrature::{map_point, ORDER2};
use crate::fem::{assemble_vnorm_matrix, element_gradients, solve_linear, FEField, FunctionSpace, SparseMatrix};
use crate::mesh::{DomainFamily, Location};
use crate::parabolic::Trajectory;
use crate::vi::{project_h, ConvexConstraint};

const NUDGE: f64 = 1e-7;

/// Cached geometry for transferring fields from a source space (the limit)
/// to a target space (a family member) and comparing both on the D-grid.
pub struct TransferPlan {
    grid: Arc<DGrid>,
    source: FunctionSpace,
    target: FunctionSpace,
    source_sampler: Sampler,
    target_sampler: Sampler,
    /// For each target dof: source triangles seen from inside each incident
    /// target triangle, with the barycentrics of the target vertex in them.
    interp: Vec<Vec<(usize, [f64; 3])>>,
    /// Per target triangle and order-2 point: source location.
    quad: Vec<[Option<Location>; 3]>,
    gram: SparseMatrix,
}

impl TransferPlan {
    pub fn new(source: &FunctionSpace, target: &FunctionSpace, grid: Arc<DGrid>) -> Result<Self> {
        let src = source.mesh();
        let tgt = target.mesh();
        if (src.holdall_radius() - tgt.holdall_radius()).abs() > 1e-12 * src.holdall_radius() {
            return Err(Error::invalid("source and target meshes use different hold-all balls"));
        }
        let source_sampler = Sampler::new(src, &grid)?;
        let target_sampler = Sampler::new(tgt, &grid)?;
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); tgt.n_vertices()];
        for (t, tri) in tgt.triangles().iter().enumerate() {
            for &v in tri {
                incident[v].push(t);
            }
        }
        let interp = (0..target.n_dofs())
            .into_par_iter()
            .map(|d| {
                let v = target.vertex(d);
                let x = tgt.vertices()[v];
                let mut out = Vec::new();
                for &t in &incident[v] {
                    let c = tgt.centroid(t);
                    let p = [x[0] + NUDGE * (c[0] - x[0]), x[1] + NUDGE * (c[1] - x[1])];
                    if let Some(loc) = src.locate_point(p) {
                        let b = crate::mesh::barycentric(&src.triangle_points(loc.triangle), x);
                        out.push((loc.triangle, b));
                    }
                }
                out
            })
            .collect();
        let quad = (0..tgt.n_triangles())
            .into_par_iter()
            .map(|t| {
                let pts = tgt.triangle_points(t);
                let mut q = [None, None, None];
                for (i, b) in ORDER2.bary.iter().enumerate() {
                    q[i] = src.locate_point(map_point(&pts, b));
                }
                q
            })
            .collect();
        Ok(TransferPlan {
            grid,
            source: source.clone(),
            target: target.clone(),
            source_sampler,
            target_sampler,
            interp,
            quad,
            gram: assemble_vnorm_matrix(target)?,
        })
    }

    pub fn grid(&self) -> &DGrid {
        &self.grid
    }

    pub fn source(&self) -> &FunctionSpace {
        &self.source
    }

    pub fn target(&self) -> &FunctionSpace {
        &self.target
    }

    /// Nodal transfer: each target value is the mean of the source's limits
    /// from inside the incident target triangles (zero where the target
    /// vertex sees no source triangle).
    pub fn interpolate(&self, u: &FEField) -> Result<FEField> {
        self.check_source(u)?;
        let values = self
            .interp
            .iter()
            .map(|list| {
                if list.is_empty() {
                    return 0.0;
                }
                let s: f64 = list
                    .iter()
                    .map(|&(t, b)| {
                        let v = u.triangle_values(t);
                        b[0] * v[0] + b[1] * v[1] + b[2] * v[2]
                    })
                    .sum();
                s / list.len() as f64
            })
            .collect();
        FEField::new(self.target.clone(), values)
    }

    /// V-projection onto the target space of the restriction of `u` to the
    /// target domain: solves `G w = ℓ` with
    /// `ℓ_k = ∫ (u φ_k + ∇u · ∇φ_k)` over the target mesh.
    pub fn riesz_project(&self, u: &FEField) -> Result<FEField> {
        self.check_source(u)?;
        let src = self.source.mesh();
        let tgt = self.target.mesh();
        let src_grads: Vec<[f64; 2]> = (0..src.n_triangles()).map(|t| u.gradient_on(t)).collect();
        let mut rhs = vec![0.0; self.target.n_dofs()];
        for (t, tri) in tgt.triangles().iter().enumerate() {
            let pts = tgt.triangle_points(t);
            let area = tgt.signed_area(t);
            let g = element_gradients(&pts);
            for (q, (b, w)) in ORDER2.bary.iter().zip(ORDER2.weights).enumerate() {
                let Some(loc) = &self.quad[t][q] else {
                    continue;
                };
                let uval = u.eval_at(loc);
                let ug = src_grads[loc.triangle];
                for i in 0..3 {
                    if let Some(d) = self.target.dof(tri[i]) {
                        rhs[d] += w * area * (uval * b[i] + ug[0] * g[i][0] + ug[1] * g[i][1]);
                    }
                }
            }
        }
        let w = if rhs.iter().all(|&x| x == 0.0) {
            rhs
        } else {
            solve_linear(&self.gram, &rhs, 1e-12)?
        };
        FEField::new(self.target.clone(), w)
    }

    fn check_source(&self, u: &FEField) -> Result<()> {
        if !u.space().same_as(&self.source) {
            return Err(Error::invalid("field does not live on the plan's source space"));
        }
        Ok(())
    }

    pub fn embed_source(&self, u: &FEField, kind: EmbedKind) -> Result<EmbeddedField> {
        embed_with(u, kind, &self.source_sampler)
    }

    pub fn embed_target(&self, w: &FEField, kind: EmbedKind) -> Result<EmbeddedField> {
        embed_with(w, kind, &self.target_sampler)
    }

    /// Upper bound for `dist(ũ, K̃_n)` in the embedded V-norm: the better of
    /// interpolate-then-project and Riesz-project-then-project.
    pub fn defect(&self, u: &FEField, constraint: Option<&ConvexConstraint>, kind: EmbedKind) -> Result<f64> {
        if let Some(c) = constraint {
            if !c.space().same_as(&self.target) {
                return Err(Error::invalid("constraint must live on the target space"));
            }
        }
        let eu = self.embed_source(u, kind)?;
        let mut best = f64::INFINITY;
        for cand in [self.interpolate(u)?, self.riesz_project(u)?] {
            let w = match constraint {
                Some(c) => project_h(c, &cand)?,
                None => cand,
            };
            let ew = self.embed_target(&w, kind)?;
            best = best.min(eu.distance(&ew, &self.grid));
        }
        Ok(best)
    }
}

/// (M1) defect of `u` (on the limit space) with respect to the target space
/// or the discrete convex subset given by `constraint`.
pub fn m1_defect(
    u: &FEField,
    target: &FunctionSpace,
    constraint: Option<&ConvexConstraint>,
    kind: EmbedKind,
    grid: Arc<DGrid>,
) -> Result<f64> {
    TransferPlan::new(u.space(), target, grid)?.defect(u, constraint, kind)
}

/// Time-integrated defect `sqrt(∫ d(t)² dt)` with the trapezoidal rule.
pub fn m1_defect_time(
    u: &Trajectory,
    constraint: Option<&ConvexConstraint>,
    kind: EmbedKind,
    plan: &TransferPlan,
) -> Result<f64> {
    let g = u.grid();
    let d: Vec<f64> = (0..g.n_nodes())
        .into_par_iter()
        .map(|k| plan.defect(&u.field(k), constraint, kind))
        .collect::<Result<_>>()?;
    Ok(g
        .trapezoid_weights()
        .iter()
        .zip(&d)
        .map(|(w, x)| w * x * x)
        .sum::<f64>()
        .sqrt())
}

/// Per-member (M1) defects over a family.
#[derive(Debug, Clone, PartialEq)]
pub struct MoscoDefectSeries {
    pub params: Vec<f64>,
    pub defects: Vec<f64>,
    pub norm_kind: EmbedKind,
}

impl MoscoDefectSeries {
    /// Defect of a field given on the family's limit space against every
    /// member, in parallel over members.
    pub fn compute(family: &DomainFamily, u: &FEField, kind: EmbedKind, grid: Arc<DGrid>) -> Result<Self> {
        family.validate()?;
        let bc = u.space().bc();
        let defects = (1..=family.len())
            .into_par_iter()
            .map(|n| {
                let mesh = family.member(n).map_err(|e| e.at_index(n))?;
                let target = FunctionSpace::new(Arc::new(mesh), bc);
                m1_defect(u, &target, None, kind, grid.clone()).map_err(|e| e.at_index(n))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MoscoDefectSeries {
            params: family.params(),
            defects,
            norm_kind: kind,
        })
    }

    /// CSV with header `n,param,defect,norm_kind`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "n,param,defect,norm_kind")?;
        for (i, (p, d)) in self.params.iter().zip(&self.defects).enumerate() {
            writeln!(w, "{},{},{},{}", i + 1, fmt_csv(*p), fmt_csv(*d), self.norm_kind.as_str())?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_csv(x: f64) -> String {
    format!("{x:.10e}")
}
