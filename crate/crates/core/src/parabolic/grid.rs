use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_k = start + k τ`, `τ = T / M`, `k = 0..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    #[serde(default)]
    pub start: f64,
    /// Length of the interval.
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(rename = "M")]
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        let g = TimeGrid {
            start: 0.0,
            t_final,
            steps,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid on `[start, start + length]`.
    pub fn on_interval(start: f64, length: f64, steps: usize) -> Result<Self> {
        let g = TimeGrid {
            start,
            t_final: length,
            steps,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::invalid(format!("T must be positive, got {}", self.t_final)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("M must be at least 1"));
        }
        if !self.start.is_finite() {
            return Err(Error::invalid("grid start must be finite"));
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.steps + 1
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.end()
        } else {
            self.start + k as f64 * self.tau()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.node(k)).collect()
    }

    pub fn end(&self) -> f64 {
        self.start + self.t_final
    }

    /// Trapezoidal weights over the nodes; they sum to `T`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let tau = self.tau();
        let mut w = vec![tau; self.n_nodes()];
        w[0] = 0.5 * tau;
        w[self.steps] = 0.5 * tau;
        w
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self == other
    }
}
