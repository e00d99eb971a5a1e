use serde::{Deserialize, Serialize};

use crate::error::{config_error, Result};
use crate::scheme::QUAD_REFINE_VAR;

/// Settings of a verification pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Gauss points per slice interval in time; results are compared with `2 refine`.
    pub refine: usize,
    pub modes: Vec<[i32; 2]>,
    /// Relative tolerance, multiplied by the field scale, the test norm and the box measure.
    pub tolerance: f64,
    /// A residual is resolved when refinement changes it by less than this fraction.
    pub resolution_ratio: f64,
    /// Threshold for the measure of `{dist > threshold}`.
    pub dist_threshold: f64,
    pub admissibility: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            refine: 4,
            modes: vec![[1, 0], [0, 1], [1, 1]],
            tolerance: 1e-6,
            resolution_ratio: 0.1,
            dist_threshold: 1e-3,
            admissibility: true,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.refine == 0 {
            return Err(config_error("/refine", "must be positive"));
        }
        if self.modes.is_empty() || self.modes.iter().any(|m| *m == [0, 0]) {
            return Err(config_error("/modes", "must be nonempty and nonzero"));
        }
        if !(self.tolerance > 0.0) {
            return Err(config_error("/tolerance", "must be positive"));
        }
        if !(self.resolution_ratio > 0.0) {
            return Err(config_error("/resolution_ratio", "must be positive"));
        }
        Ok(())
    }

    /// Applies `WILDFLOW_QUAD_REFINE` when it is set.
    pub fn with_env(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var(QUAD_REFINE_VAR) {
            self.refine = v.trim().parse().map_err(|_| config_error("/refine", format!("{QUAD_REFINE_VAR}={v:?} is not a positive integer")))?;
        }
        self.validate()?;
        Ok(self)
    }
}
