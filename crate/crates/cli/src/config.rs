use std::path::PathBuf;

use mosco_lab::fem::{BoundaryCondition, CoefficientSet, Preset};
use mosco_lab::mesh::{
    generate_cracked_disk, generate_disk, generate_dumbbell, generate_fixed_hole, generate_rectangle,
    generate_two_chambers, generate_unit_square, read_mesh_file, Mesh,
};
use mosco_lab::parabolic::TimeGrid;
use mosco_lab::study::StudyConfig;
use mosco_lab::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A single mesh, generated or read from a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshSpec {
    CrackedDisk { delta: f64, h: f64 },
    Disk { h: f64 },
    FixedHole { radius: f64, h: f64 },
    Dumbbell { width: f64, h: f64 },
    TwoChambers { h: f64 },
    UnitSquare { h: f64 },
    Rectangle { width: f64, height: f64, hx: f64, hy: f64 },
    File { path: PathBuf },
}

impl MeshSpec {
    pub fn build(&self) -> Result<Mesh> {
        match self {
            MeshSpec::CrackedDisk { delta, h } => generate_cracked_disk(*delta, *h),
            MeshSpec::Disk { h } => generate_disk(*h),
            MeshSpec::FixedHole { radius, h } => generate_fixed_hole(*radius, *h),
            MeshSpec::Dumbbell { width, h } => generate_dumbbell(*width, *h),
            MeshSpec::TwoChambers { h } => generate_two_chambers(*h),
            MeshSpec::UnitSquare { h } => generate_unit_square(*h),
            MeshSpec::Rectangle { width, height, hx, hy } => generate_rectangle(*width, *height, *hx, *hy),
            MeshSpec::File { path } => read_mesh_file(path),
        }
    }
}

fn dirichlet() -> BoundaryCondition {
    BoundaryCondition::Dirichlet
}

fn one() -> f64 {
    1.0
}

/// Configuration of a single parabolic or obstacle solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshSpec,
    #[serde(default = "dirichlet")]
    pub bc: BoundaryCondition,
    #[serde(default = "CoefficientSet::laplacian")]
    pub coeffs: CoefficientSet,
    #[serde(default = "Preset::zero")]
    pub u0: Preset,
    #[serde(default = "Preset::zero")]
    pub f: Preset,
    pub grid: TimeGrid,
    #[serde(default = "one")]
    pub theta: f64,
    /// Obstacle `ψ`; turns the run into a parabolic VI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacle: Option<Preset>,
    /// Exact solution for error metrics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Preset>,
    /// Estimate M, alpha, lambda by sampling.
    #[serde(default)]
    pub estimate_constants: bool,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::InvalidInput(format!("theta must lie in [1/2, 1], got {}", self.theta)));
        }
        if self.obstacle.is_some() && self.theta != 1.0 {
            return Err(Error::InvalidInput("obstacle runs use implicit Euler (theta = 1)".into()));
        }
        Ok(())
    }
}

/// Reads a JSON config, accepting either the config itself or a run
/// manifest that echoes one.
pub fn load_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut v: Value = serde_json::from_str(text)?;
    if let Value::Object(map) = &mut v {
        if map.contains_key("tool") {
            if let Some(inner) = map.remove("config") {
                v = inner;
            }
        }
    }
    Ok(serde_json::from_value(v)?)
}

pub fn load_run_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = load_json(text)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_study_config(text: &str) -> Result<StudyConfig> {
    let cfg: StudyConfig = load_json(text)?;
    cfg.validate()?;
    Ok(cfg)
}
