use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{BoundaryCondition, CoefficientSet, Preset};
use crate::mesh::DomainFamily;
use crate::mosco::DEFAULT_CELLS;
use crate::parabolic::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Dirichlet,
    Neumann,
    Vi,
}

impl StudyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StudyKind::Dirichlet => "dirichlet",
            StudyKind::Neumann => "neumann",
            StudyKind::Vi => "vi",
        }
    }
}

/// Error norms a study can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NormKind {
    /// `L²(0,T;H¹)`: values and gradients together.
    #[serde(rename = "L2H1")]
    L2H1,
    /// Sup in time of the `L²` distance.
    #[serde(rename = "CL2")]
    CL2,
    /// `L²(0,T;L²)` of the gradient samples.
    #[serde(rename = "grad")]
    Grad,
    /// `L²(0,T;L²)` of the values.
    #[serde(rename = "L2L2")]
    L2L2,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::L2H1 => "L2H1",
            NormKind::CL2 => "CL2",
            NormKind::Grad => "grad",
            NormKind::L2L2 => "L2L2",
        }
    }
}

/// Initial value and source, with optional perturbations
/// `u0_n = u0 + p_n u0_perturbation`, `f_n = f + p_n f_perturbation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyData {
    #[serde(default = "Preset::zero")]
    pub u0: Preset,
    #[serde(default = "Preset::zero")]
    pub f: Preset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0_perturbation: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_perturbation: Option<Preset>,
}

impl Default for StudyData {
    fn default() -> Self {
        StudyData {
            u0: Preset::zero(),
            f: Preset::zero(),
            u0_perturbation: None,
            f_perturbation: None,
        }
    }
}

fn perturbed(base: &Preset, pert: &Option<Preset>, p: f64) -> Preset {
    match pert {
        Some(q) => Preset::Sum {
            terms: vec![base.clone(), Preset::product(vec![Preset::constant(p), q.clone()])],
        },
        None => base.clone(),
    }
}

impl StudyData {
    pub fn new(u0: Preset, f: Preset) -> Self {
        StudyData {
            u0,
            f,
            u0_perturbation: None,
            f_perturbation: None,
        }
    }

    /// Data for member `n` with family parameter `p`.
    pub fn member(&self, p: f64) -> (Preset, Preset) {
        (
            perturbed(&self.u0, &self.u0_perturbation, p),
            perturbed(&self.f, &self.f_perturbation, p),
        )
    }
}

fn dirichlet() -> BoundaryCondition {
    BoundaryCondition::Dirichlet
}

/// Obstacle family `ψ_n = ψ + s_n` on the fixed limit domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub psi: Preset,
    /// Shifts `s_1, ..., s_N`; default the family parameters. The limit
    /// obstacle is `ψ` itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<f64>>,
    #[serde(default = "dirichlet")]
    pub space_bc: BoundaryCondition,
}

fn default_cells() -> usize {
    DEFAULT_CELLS
}

fn default_true() -> bool {
    true
}

fn is_default_cells(c: &usize) -> bool {
    *c == DEFAULT_CELLS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub family: DomainFamily,
    pub bc: StudyKind,
    #[serde(default = "CoefficientSet::laplacian")]
    pub coeffs: CoefficientSet,
    #[serde(default)]
    pub data: StudyData,
    pub grid: TimeGrid,
    /// Norms entering the verdict; default depends on `bc`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<Vec<NormKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacle: Option<ObstacleSpec>,
    /// Restrict the sup-in-time norm to `t >= weak_data_from`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_data_from: Option<f64>,
    /// Also compute M1 defects of the limit solution against each member.
    #[serde(default)]
    pub defects: bool,
    /// Check the coefficient hypotheses on the limit mesh before solving.
    #[serde(default = "default_true")]
    pub check_coefficients: bool,
    #[serde(default = "default_cells", skip_serializing_if = "is_default_cells")]
    pub grid_cells: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl StudyConfig {
    pub fn new(family: DomainFamily, bc: StudyKind, data: StudyData, grid: TimeGrid) -> Self {
        StudyConfig {
            family,
            bc,
            coeffs: CoefficientSet::laplacian(),
            data,
            grid,
            norms: None,
            obstacle: None,
            weak_data_from: None,
            defects: false,
            check_coefficients: true,
            grid_cells: DEFAULT_CELLS,
            jobs: None,
            seed: 0,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: StudyConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn norms(&self) -> Vec<NormKind> {
        match &self.norms {
            Some(n) => n.clone(),
            None => match self.bc {
                StudyKind::Dirichlet => vec![NormKind::L2H1, NormKind::CL2],
                StudyKind::Neumann => vec![NormKind::L2L2, NormKind::Grad, NormKind::CL2],
                StudyKind::Vi => vec![NormKind::L2H1],
            },
        }
    }

    /// Obstacle shifts `s_n`.
    pub fn shifts(&self) -> Vec<f64> {
        match self.obstacle.as_ref().and_then(|o| o.shifts.clone()) {
            Some(s) => s,
            None => self.family.params(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        self.grid.validate()?;
        if self.norms.as_ref().is_some_and(|n| n.is_empty()) {
            return Err(Error::invalid("norm list must not be empty"));
        }
        if self.grid_cells < 8 {
            return Err(Error::invalid("grid_cells must be at least 8"));
        }
        if self.jobs == Some(0) {
            return Err(Error::invalid("jobs must be positive"));
        }
        if let Some(d) = self.weak_data_from {
            if !(d >= self.grid.start && d < self.grid.end()) {
                return Err(Error::invalid(format!(
                    "weak_data_from = {d} must lie in [start, T)"
                )));
            }
        }
        match self.bc {
            StudyKind::Vi => {
                if self.obstacle.is_none() {
                    return Err(Error::invalid("a VI study needs an obstacle"));
                }
                let s = self.shifts();
                if s.len() != self.family.len() {
                    return Err(Error::invalid(format!(
                        "{} obstacle shifts for {} family members",
                        s.len(),
                        self.family.len()
                    )));
                }
                if s.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("obstacle shifts must be finite"));
                }
                if self.norms().contains(&NormKind::L2L2) {
                    return Err(Error::invalid("VI studies report L2H1, CL2 and grad only"));
                }
            }
            _ => {
                if self.obstacle.is_some() {
                    return Err(Error::invalid("obstacle given for a non-VI study"));
                }
            }
        }
        Ok(())
    }
}
