use serde::{Deserialize, Serialize};

use crate::error::{config_error, Result};

/// Environment variable overriding [`IterationConfig::quad_refine`].
pub const QUAD_REFINE_VAR: &str = "WILDFLOW_QUAD_REFINE";

/// Knobs of the stage loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IterationConfig {
    pub max_stages: usize,
    /// Wave levels applied in every stage before the schedule is checked.
    pub levels: usize,
    /// Hard cap on levels per stage.
    pub max_levels: usize,
    /// Margin of the first stage; stage `k` uses `eta * eta_decay^-(k-1)`.
    pub eta: f64,
    pub eta_decay: f64,
    /// Nominal cube side at stage 0; stage `k` uses at most `r0 2^-k`.
    /// Defaults to a quarter of the torus period.
    pub r0: Option<f64>,
    /// Smallest cube side the covering may use before giving up.
    pub min_side: f64,
    /// Fraction `1/4` in the coverage deficit `eps / (4 C0)`.
    pub deficit_fraction: f64,
    /// Monte Carlo chains per grid cell (quadrature refinement).
    pub quad_refine: usize,
    /// Resolution of the quantized split weights `mu1`.
    pub mu_bins: usize,
    /// Plateau fraction of the cube cutoff along every axis.
    pub inner_fraction: f64,
    /// Largest power of two tried for the frequency.
    pub max_doublings: u32,
    /// Relative width of the source-matrix bins used to share wave kernels.
    pub source_bin: f64,
    /// Wave numbers of the trigonometric weak-* test functions.
    pub test_modes: Vec<[i32; 2]>,
    /// Temporal half-width of the `t = 0` pass at stage 1, halved every stage.
    pub initial_width: f64,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            max_stages: 6,
            levels: 4,
            max_levels: 12,
            eta: 0.02,
            eta_decay: 8.0,
            r0: None,
            min_side: 1e-9,
            deficit_fraction: 0.25,
            quad_refine: 4,
            mu_bins: 256,
            inner_fraction: 0.99,
            max_doublings: 60,
            source_bin: 0.05,
            test_modes: vec![[1, 0], [0, 1], [1, 1]],
            initial_width: 0.5,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("/eta", self.eta),
            ("/min_side", self.min_side),
            ("/deficit_fraction", self.deficit_fraction),
            ("/source_bin", self.source_bin),
            ("/initial_width", self.initial_width),
        ];
        for (ptr, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(config_error(ptr, format!("must be positive, got {v}")));
            }
        }
        if !(self.eta < 0.5) {
            return Err(config_error("/eta", "must stay below 1/2"));
        }
        if !(self.eta_decay > 1.0) {
            return Err(config_error("/eta_decay", "must exceed 1"));
        }
        if let Some(r0) = self.r0 {
            if !(r0 > 0.0) {
                return Err(config_error("/r0", "must be positive"));
            }
        }
        if self.levels == 0 || self.max_levels < self.levels {
            return Err(config_error("/levels", "need 0 < levels <= max_levels"));
        }
        if self.quad_refine == 0 {
            return Err(config_error("/quad_refine", "need at least one chain per cell"));
        }
        if self.mu_bins < 4 {
            return Err(config_error("/mu_bins", "need at least 4 bins"));
        }
        if !(self.inner_fraction > 0.0 && self.inner_fraction < 1.0) {
            return Err(config_error("/inner_fraction", "must lie in (0, 1)"));
        }
        if self.test_modes.is_empty() {
            return Err(config_error("/test_modes", "the weak-* test family must be nonempty"));
        }
        Ok(())
    }

    /// Applies `WILDFLOW_QUAD_REFINE` if set.
    pub fn with_env(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var(QUAD_REFINE_VAR) {
            self.quad_refine = v
                .trim()
                .parse()
                .map_err(|_| config_error("/quad_refine", format!("{QUAD_REFINE_VAR}={v:?} is not a positive integer")))?;
        }
        self.validate()?;
        Ok(self)
    }

    /// Margin scale `eta_k` of stage `k >= 1`.
    pub fn eta_at(&self, stage: usize) -> f64 {
        self.eta * self.eta_decay.powi(1 - stage as i32)
    }
}
