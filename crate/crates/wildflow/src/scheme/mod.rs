//! The stage loop of the convex integration.
//!
//! A stage takes a strict subsolution `w_k` on the bounded region `D` and
//! returns `w_{k+1}` whose integrated distance to the constraint set obeys
//!
//! ```text
//! int_D dist(w_{k+1}, K) <= min(2^-k, 1/2 int_D dist(w_k, K)),
//! ```
//!
//! while `|w_k|^2_{L2(D)}` grows and `w_{k+1} - w_k` stays weakly small.
//!
//! The perturbations are localized plane waves on cubes much smaller than
//! the grid, so they are represented statistically: each grid cell of `D`
//! carries a few Monte Carlo chains (see [`StagedState`]), every integral is a
//! Monte Carlo estimate with a reported standard error, and all tolerances are
//! three standard errors.

mod cache;
mod census;
mod config;
mod laminate;
mod region;
mod report;

#[cfg(test)]
mod tests;

pub use census::{default_tolerance, state_census, Census, Cluster, SIGNIFICANT_FRACTION};
pub use config::{IterationConfig, QUAD_REFINE_VAR};
pub use laminate::{InitialMomentum, Pass, StagedState};
pub use region::SpaceTimeRegion;
pub use report::{read_stage_csv, weighted_sum, write_stage_csv, StageReport};

use crate::ansatz::SubsolutionState;
use crate::error::{invalid, Error};

/// A failed stage together with the reports of the stages before it.
#[derive(Debug, thiserror::Error)]
#[error("stage {stage} failed: {source}")]
pub struct IterationError {
    pub stage: usize,
    #[source]
    pub source: Error,
    pub reports: Vec<StageReport>,
}

impl From<Error> for IterationError {
    fn from(source: Error) -> Self {
        Self { stage: 0, source, reports: Vec::new() }
    }
}

pub type IterationResult<T> = std::result::Result<T, IterationError>;

fn run(state: &mut StagedState, cfg: &IterationConfig, pass: Pass) -> IterationResult<Vec<StageReport>> {
    let mut reports: Vec<StageReport> = Vec::new();
    for k in 1..=cfg.max_stages {
        let current = reports.last().map_or_else(|| state.dist_integral().0, |r| r.dist_d1);
        let eps = 0.5f64.powi(k as i32).min(0.5 * current);
        match state.one_stage(eps, pass, cfg) {
            Ok(r) => reports.push(r),
            Err(source) => return Err(IterationError { stage: k, source, reports }),
        }
    }
    Ok(reports)
}

/// Runs `cfg.max_stages` stages on the strict region of `base`.
pub fn iterate(
    base: SubsolutionState,
    cfg: &IterationConfig,
    seed: u64,
) -> IterationResult<(StagedState, Vec<StageReport>)> {
    let mut state = StagedState::new(base, cfg, seed)?;
    let reports = run(&mut state, cfg, Pass::Generic)?;
    Ok((state, reports))
}

/// [`iterate`] with every stage also covering the `t = 0` layer, so the
/// initial momentum itself is driven towards the constraint set.
pub fn iterate_with_initial_data(
    base: SubsolutionState,
    cfg: &IterationConfig,
    seed: u64,
) -> IterationResult<(InitialMomentum, StagedState, Vec<StageReport>)> {
    let mut state = StagedState::new(base, cfg, seed)?;
    if state.region.t_start > 0.0 || state.region.time_cell(0).is_none() {
        return Err(invalid("the strict region does not reach t = 0").into());
    }
    let reports = run(&mut state, cfg, Pass::Initial)?;
    Ok((state.initial_momentum(), state, reports))
}
