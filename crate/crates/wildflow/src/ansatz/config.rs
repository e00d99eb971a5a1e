use serde::{Deserialize, Serialize};

use super::build::{
    build_perturbed_density, build_piecewise_constant, build_piecewise_lipschitz, LipschitzOptions, PerturbedOptions,
};
use super::density::{ModalDensity, RegionDensity};
use super::pressure::{PressureLaw, SourceMatrix};
use super::state::{SubsolutionState, TimeGrid};
use crate::error::{config_error, Result};
use crate::operators::TorusGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureSpec {
    pub a: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub matrix: [[f64; 2]; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum DensitySpec {
    PiecewiseConstant(RegionDensity),
    Perturbed(ModalDensity),
    PiecewiseLipschitz(RegionDensity),
}

/// Constants of the energy level; which fields are needed depends on the density kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiSpec {
    /// Constant level of the piecewise-constant ansatz.
    pub value: Option<f64>,
    pub chi0: Option<f64>,
    pub c0: Option<f64>,
    pub c: Option<[f64; 4]>,
    pub theta: Option<f64>,
    pub transition: Option<f64>,
    pub floor_constant: Option<f64>,
    pub step: Option<f64>,
    pub eps_budget: Option<f64>,
    pub slope_offset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub resolution: usize,
    pub length: f64,
    pub t_end: f64,
    pub slices: Option<usize>,
    pub pad: Option<usize>,
    pub min_cells: Option<usize>,
}

/// `{pressure, source, density, chi, grid}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub pressure: PressureSpec,
    pub source: SourceSpec,
    pub density: DensitySpec,
    #[serde(default)]
    pub chi: ChiSpec,
    pub grid: GridSpec,
}

impl AnsatzSpec {
    pub fn pressure_law(&self) -> Result<PressureLaw> {
        PressureLaw::new(self.pressure.a, self.pressure.gamma).map_err(|e| config_error("/pressure", e))
    }

    pub fn source_matrix(&self) -> Result<SourceMatrix> {
        let m = self.source.matrix;
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(config_error("/source/matrix", "entries must be finite"));
        }
        Ok(SourceMatrix { matrix: m })
    }

    pub fn torus_grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.grid.resolution, self.grid.length).map_err(|e| config_error("/grid", e))
    }

    pub fn perturbed_options(&self) -> PerturbedOptions {
        let d = PerturbedOptions::default();
        let c = &self.chi;
        PerturbedOptions {
            eps_budget: c.eps_budget.unwrap_or(d.eps_budget),
            c0: c.c0.unwrap_or(d.c0),
            chi0: c.chi0.unwrap_or(d.chi0),
            floor_constant: c.floor_constant.unwrap_or(d.floor_constant),
            step: c.step.unwrap_or(d.step),
            t_end: self.grid.t_end,
            slices: self.grid.slices,
            slope_offset: c.slope_offset.unwrap_or(d.slope_offset),
        }
    }

    pub fn lipschitz_options(&self) -> LipschitzOptions {
        let d = LipschitzOptions::default();
        let c = &self.chi;
        LipschitzOptions {
            transition: c.transition.unwrap_or(d.transition),
            theta: c.theta.unwrap_or(d.theta),
            c: c.c.unwrap_or(d.c),
            chi0: c.chi0.unwrap_or(d.chi0),
            floor_constant: c.floor_constant.unwrap_or(d.floor_constant),
            step: c.step.unwrap_or(d.step),
            t_end: self.grid.t_end,
            slices: self.grid.slices,
            pad: self.grid.pad.unwrap_or(d.pad),
            min_cells: self.grid.min_cells.unwrap_or(d.min_cells),
        }
    }

    /// Runs the builder selected by the density kind.
    pub fn build(&self, seed: u64) -> Result<SubsolutionState> {
        let plaw = self.pressure_law()?;
        let source = self.source_matrix()?;
        let grid = self.torus_grid()?;
        match &self.density {
            DensitySpec::PiecewiseConstant(d) => {
                let chi = self.chi.value.ok_or_else(|| config_error("/chi/value", "required for piecewise_constant"))?;
                let slices = self.grid.slices.unwrap_or(16);
                if slices == 0 || !(self.grid.t_end > 0.0) {
                    return Err(config_error("/grid", "need t_end > 0 and at least one slice"));
                }
                let time = TimeGrid { t_end: self.grid.t_end, slices };
                build_piecewise_constant(grid, time, d, chi, plaw, source, seed)
            }
            DensitySpec::Perturbed(d) => build_perturbed_density(&d.sample(&grid), plaw, source, &self.perturbed_options()),
            DensitySpec::PiecewiseLipschitz(d) => {
                build_piecewise_lipschitz(d, grid, plaw, source, &self.lipschitz_options(), seed)
            }
        }
    }
}
