use serde::{Deserialize, Serialize};

use super::{
    generate_cracked_disk, generate_disk, generate_dumbbell, generate_fixed_hole,
    generate_two_chambers, generate_unit_square, read_mesh_file, Mesh,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// Unit disk slit along `[delta_n, 1) x {0}`; limit slit from the centre.
    CrackedDisk,
    /// Two chambers joined by a handle of width `w_n`; limit without handle.
    Dumbbell,
    /// Unit disk minus a fixed hole for every `n`; declared limit the full
    /// disk. The family does not converge in the sense of Mosco.
    FixedHole { radius: f64 },
    /// The unit square for every index (obstacle studies on a fixed domain).
    UnitSquare,
    /// Meshes read from files.
    Custom { members: Vec<String>, limit: String },
}

fn default_n_max() -> usize {
    6
}

/// A sequence of domains `Omega_n` together with its declared limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFamily {
    #[serde(flatten)]
    pub kind: FamilyKind,
    /// Perturbation parameters `p_1 > p_2 > ... > 0`; defaults to `2^-n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Target mesh size, shared by every member and the limit.
    pub h: f64,
    /// Use the limit domain for every member (floor calibration runs).
    #[serde(default)]
    pub repeat_limit: bool,
}

impl DomainFamily {
    pub fn new(kind: FamilyKind, h: f64, n_max: usize) -> Self {
        DomainFamily {
            kind,
            params: None,
            n_max,
            h,
            repeat_limit: false,
        }
    }

    pub fn cracked_disk(h: f64, n_max: usize) -> Self {
        Self::new(FamilyKind::CrackedDisk, h, n_max)
    }

    pub fn with_params(mut self, params: Vec<f64>) -> Self {
        self.n_max = params.len();
        self.params = Some(params);
        self
    }

    pub fn repeated_limit(mut self) -> Self {
        self.repeat_limit = true;
        self
    }

    /// Parameter sequence `p_1, ..., p_N`.
    pub fn params(&self) -> Vec<f64> {
        match &self.params {
            Some(p) => p.clone(),
            None => match &self.kind {
                FamilyKind::Custom { members, .. } => {
                    (1..=members.len()).map(|n| 2f64.powi(-(n as i32))).collect()
                }
                _ => (1..=self.n_max).map(|n| 2f64.powi(-(n as i32))).collect(),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.params().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.params();
        if p.is_empty() {
            return Err(Error::invalid("domain family needs at least one member"));
        }
        if p.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::invalid("family parameters must be positive and finite"));
        }
        if p.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::invalid(
                "family parameters must be strictly decreasing towards the limit",
            ));
        }
        if !(self.h > 0.0) {
            return Err(Error::invalid("mesh size h must be positive"));
        }
        match &self.kind {
            FamilyKind::CrackedDisk if p[0] >= 1.0 => {
                Err(Error::invalid("cracked-disk tips must satisfy delta < 1"))
            }
            FamilyKind::Custom { members, .. } if members.len() != p.len() => Err(
                Error::invalid("custom family: parameter count must match member count"),
            ),
            _ => Ok(()),
        }
    }

    /// Mesh size used for member `n`: the dumbbell is refined so that its
    /// handle always carries at least two element layers.
    pub fn member_h(&self, n: usize) -> f64 {
        match self.kind {
            FamilyKind::Dumbbell => self.h.min(self.params()[n - 1] / 2.0),
            _ => self.h,
        }
    }

    /// Member `Omega_n`, `n = 1..=len()`.
    pub fn member(&self, n: usize) -> Result<Mesh> {
        let params = self.params();
        if n == 0 || n > params.len() {
            return Err(Error::invalid(format!(
                "family index {n} out of range 1..={}",
                params.len()
            )));
        }
        if self.repeat_limit {
            return self.limit();
        }
        let p = params[n - 1];
        match &self.kind {
            FamilyKind::CrackedDisk => generate_cracked_disk(p, self.h),
            FamilyKind::Dumbbell => generate_dumbbell(p, self.member_h(n)),
            FamilyKind::FixedHole { radius } => generate_fixed_hole(*radius, self.h),
            FamilyKind::UnitSquare => generate_unit_square(self.h),
            FamilyKind::Custom { members, .. } => read_mesh_file(&members[n - 1]),
        }
    }

    /// The declared limit domain `Omega`.
    pub fn limit(&self) -> Result<Mesh> {
        match &self.kind {
            FamilyKind::CrackedDisk => generate_cracked_disk(0.0, self.h),
            FamilyKind::Dumbbell => generate_two_chambers(self.h),
            FamilyKind::FixedHole { .. } => generate_disk(self.h),
            FamilyKind::UnitSquare => generate_unit_square(self.h),
            FamilyKind::Custom { limit, .. } => read_mesh_file(limit),
        }
    }
}
