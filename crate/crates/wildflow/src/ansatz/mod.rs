mod build;
mod chi;
mod config;
mod density;
mod energy;
mod pressure;
mod state;

pub use build::{
    build_perturbed_density, build_piecewise_constant, build_piecewise_lipschitz, decay_profile, dyadic_cover,
    slice_residuals, DecaySample, LipschitzOptions, PerturbedOptions, WhitneyCube,
};
pub use config::{AnsatzSpec, ChiSpec, DensitySpec, GridSpec, PressureSpec, SourceSpec};
pub use chi::{solve_chi, ChiCurve, ChiMode, ChiParams};
pub use density::{BoxRegion, DensityMode, ModalDensity, RegionDensity};
pub use energy::{energy_density, energy_production, production_scale};
pub use pressure::{beta_of, PressureLaw, SourceMatrix};
pub use state::{
    read_slices, write_slices, AnsatzKind, BuildDiagnostics, ConstraintSet, RegionConstraint, Slice, SliceIndex,
    StrictRegion, SubsolutionState, TimeGrid,
};

#[cfg(test)]
mod tests;
