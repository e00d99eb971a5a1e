use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Monitors of one stage `w_k -> w_{k+1}`.
///
/// Every integral is a Monte Carlo estimate over the chains of the grid
/// cells; `*_se` fields are standard errors and tolerances are three of them.
/// All windows `D_j` coincide with the bounded region `D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    /// `generic`, or `initial` when the pass also covers the `t = 0` layer.
    pub pass: String,
    /// `min(2^-k, 1/2 int_D1 dist(w_k))`.
    pub schedule_bound: f64,
    /// `int_D dist(w_{k+1}, K)`.
    pub dist_integral: f64,
    /// The same integral over `D_1 = D`, used by the next schedule.
    pub dist_d1: f64,
    pub dist_se: f64,
    pub quad_tolerance: f64,
    /// `|w_{k+1}|^2_{L2(D)}`.
    pub l2_norm: f64,
    /// `|w_{k+1}|^2 - |w_k|^2`, nonnegative in expectation.
    pub l2_increment: f64,
    pub l2_tolerance: f64,
    /// `int_D (w_{k+1} - w_k) . w_k`.
    pub pairing: f64,
    pub pairing_bound: f64,
    pub pairing_se: f64,
    /// `sup_t |int (w_{k+1} - w_k)(., t) psi|` over the trigonometric test family.
    pub weak_star: f64,
    pub weak_star_se: f64,
    pub weak_star_budget: f64,
    pub cube_side: f64,
    pub cube_count: f64,
    /// Width of the uncovered layer along the boundary of `D`.
    pub boundary_layer: f64,
    /// Measure of the uncovered layer and its budget `eps / (4 C0)`.
    pub deficit: f64,
    pub deficit_budget: f64,
    pub levels: usize,
    /// Wave steps undone because they would have left the simplex.
    pub rejected: u64,
    /// Fraction of covered samples with no admissible split left.
    pub idle_fraction: f64,
    pub min_slack: f64,
    pub lambda_min: f64,
    pub lambda_median: f64,
    pub lambda_max: f64,
    pub kernels: usize,
    /// Median nodal `| |m|^2 - n rho q |` on the `t = 0` slice.
    pub saturation_median: Option<f64>,
    #[serde(skip)]
    pub wall_ms: f64,
}

impl StageReport {
    pub fn contracts(&self) -> bool {
        self.dist_integral <= self.schedule_bound + self.quad_tolerance
    }

    pub fn l2_monotone(&self) -> bool {
        self.l2_increment >= -self.l2_tolerance
    }

    pub fn pairing_ok(&self) -> bool {
        self.pairing.abs() <= self.pairing_bound + 3.0 * self.pairing_se
    }

    pub fn weak_star_ok(&self) -> bool {
        self.weak_star <= self.weak_star_budget + 3.0 * self.weak_star_se
    }
}

/// Writes the reports as CSV rows, one per stage.
pub fn write_stage_csv(reports: &[StageReport], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_stage_csv(path: &Path) -> Result<Vec<StageReport>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Weighted sum `sum w_i x_i` over cells of `chains` consecutive samples,
/// with the standard error estimated from the spread inside each cell (or
/// across all samples when there is a single chain).
pub fn weighted_sum(weights: &[f64], values: &[f64], chains: usize) -> (f64, f64) {
    let sum: f64 = weights.iter().zip(values).map(|(w, x)| w * x).sum();
    let mut var = 0.0;
    if chains > 1 {
        for (w, x) in weights.chunks(chains).zip(values.chunks(chains)) {
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            let s2 = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (x.len() as f64 - 1.0).max(1.0);
            var += w.iter().map(|w| w * w).sum::<f64>() * s2;
        }
    } else if values.len() > 1 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let s2 = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() as f64 - 1.0);
        var = weights.iter().map(|w| w * w).sum::<f64>() * s2;
    }
    (sum, var.sqrt())
}
