use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::VerifyConfig;
use super::constraint::{constraint_field, ConstraintSummary};
use super::family::TestFunctionFamily;
use super::residual::{admissibility_residual, field_scale, weak_residual, AdmissibilityValue, WeakResidual};
use crate::ansatz::{read_slices, DecaySample, PressureLaw, Slice, SourceMatrix};
use crate::error::Result;

/// The JSON verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub slices: usize,
    pub resolution: usize,
    pub t_end: f64,
    pub refine: usize,
    pub tolerance: f64,
    pub scale: f64,
    pub weak: Vec<WeakResidual>,
    pub admissibility: Vec<AdmissibilityValue>,
    pub constraint: Vec<ConstraintSummary>,
    pub decay: Option<Vec<DecaySample>>,
    /// Residuals whose value moved by more than the resolution ratio under refinement.
    pub unresolved: usize,
    pub pass: bool,
}

impl VerificationReport {
    pub fn weak_pass(&self) -> bool {
        self.weak.iter().all(|w| w.pass)
    }

    pub fn admissibility_pass(&self) -> bool {
        self.admissibility.iter().all(|a| a.pass)
    }

    pub fn decay_pass(&self) -> bool {
        self.decay.as_ref().is_none_or(|d| d.iter().all(|s| s.deviation <= s.bound))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }
}

/// `sup max(|rho - rho_sharp|, |m|)` per slice against `kappa e^{-beta t}`,
/// with `rho_sharp` the mean of the first slice.
pub fn decay_check(slices: &[Slice], kappa: f64, beta: f64) -> Vec<DecaySample> {
    let Some(first) = slices.first() else { return Vec::new() };
    let sharp = first.rho.mean();
    slices
        .iter()
        .map(|s| {
            let d = s.rho.values.iter().fold(0.0f64, |a, r| a.max((r - sharp).abs()));
            DecaySample { time: s.time, deviation: d.max(s.m.sup_norm()), bound: kappa * (-beta * s.time).exp() }
        })
        .collect()
}

/// Runs every check on `slices`. `kappa` enables the decay check.
pub fn verify_slices(
    slices: &[Slice],
    plaw: &PressureLaw,
    source: &SourceMatrix,
    cfg: &VerifyConfig,
    kappa: Option<f64>,
) -> Result<VerificationReport> {
    cfg.validate()?;
    let grid = slices.first().map(|s| s.grid()).ok_or_else(|| crate::error::invalid("no slices to verify"))?;
    let t_end = slices[slices.len() - 1].time;
    let signed = TestFunctionFamily::signed(grid.length, t_end, &cfg.modes)?;
    let weak = weak_residual(slices, plaw, source, &signed, cfg)?;
    let admissibility = if cfg.admissibility {
        let family = TestFunctionFamily::nonnegative(grid.length, t_end, &cfg.modes)?;
        admissibility_residual(slices, plaw, source, &family, cfg)?
    } else {
        Vec::new()
    };
    let constraint = constraint_field(slices, cfg.dist_threshold).into_iter().map(|c| c.summary).collect();
    let decay = kappa.map(|k| decay_check(slices, k, source.beta()));
    let unresolved = weak.iter().filter(|w| !w.resolved).count() + admissibility.iter().filter(|a| !a.resolved).count();
    let mut report = VerificationReport {
        slices: slices.len(),
        resolution: grid.resolution,
        t_end,
        refine: cfg.refine,
        tolerance: cfg.tolerance,
        scale: field_scale(slices, plaw, source),
        weak,
        admissibility,
        constraint,
        decay,
        unresolved,
        pass: false,
    };
    report.pass = report.weak_pass() && report.admissibility_pass() && report.decay_pass();
    Ok(report)
}

/// [`verify_slices`] on the slice dumps in `dir`.
pub fn verify_dumps(
    dir: &Path,
    plaw: &PressureLaw,
    source: &SourceMatrix,
    cfg: &VerifyConfig,
    kappa: Option<f64>,
) -> Result<VerificationReport> {
    verify_slices(&read_slices(dir)?, plaw, source, cfg, kappa)
}
