use serde::{Deserialize, Serialize};

use crate::error::{QfiError, Result};

/// Numerical knobs of the bound engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    /// Uniform grid size for the scan over mu (at least 11).
    pub mu_grid_points: usize,
    /// Golden-section iterations spent on each retained grid cell.
    pub mu_refine_iters: usize,
    /// Cap on outer iterations of the r-ascent.
    pub r_max_iters: usize,
    /// Relative objective change that counts as converged.
    pub r_tolerance: f64,
    /// Starting multipliers, one per constraint; empty means zeros.
    pub r_init: Vec<f64>,
    /// Replaces the default mu interval `[lambda_min(A), lambda_max(A)]`.
    pub mu_interval_override: Option<(f64, f64)>,
    /// Re-checks the final inner supremum on a 4x denser grid.
    pub verify: bool,
    /// Eigenvalue evaluations allowed to certify the final inner supremum.
    pub certify_budget: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            mu_grid_points: 401,
            mu_refine_iters: 60,
            r_max_iters: 2000,
            r_tolerance: 1e-7,
            r_init: Vec::new(),
            mu_interval_override: None,
            verify: true,
            certify_budget: 50_000,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.mu_grid_points < 11 {
            return Err(QfiError::InvalidInput(format!(
                "mu grid needs at least 11 points, got {}",
                self.mu_grid_points
            )));
        }
        if !(self.r_tolerance > 0.0 && self.r_tolerance.is_finite()) {
            return Err(QfiError::InvalidInput("r tolerance must be positive".into()));
        }
        if self.r_max_iters == 0 {
            return Err(QfiError::InvalidInput("r iteration cap must be positive".into()));
        }
        if self.r_init.iter().any(|v| !v.is_finite()) {
            return Err(QfiError::InvalidInput("warm-start values must be finite".into()));
        }
        if let Some((lo, hi)) = self.mu_interval_override {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(QfiError::InvalidInput(format!(
                    "mu interval ({lo}, {hi}) is not an ordered finite pair"
                )));
            }
        }
        Ok(())
    }

    pub fn with_r_init(mut self, r: Vec<f64>) -> Self {
        self.r_init = r;
        self
    }
}
