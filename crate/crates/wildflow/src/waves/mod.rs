//! Localized plane waves that solve the linear system with source exactly.
//!
//! A wave atom oscillates between two states `w1`, `w2` along a cone direction
//! `(tau, xi)`, is cut off smoothly to a space-time box, and carries correction
//! terms so that `div n = 0` and `d_t n + div V - B n = 0` hold identically.
//! All fields are closed-form sums of profile derivatives times cutoff
//! derivatives; see [`WaveKernel`] for the symbolic tables.

mod atom;
mod diagnostics;
pub mod expr;

pub use atom::{
    bound_from_coefficients, cone_direction, iso_norm, segment_distance, Correction, LambdaRule, WaveAtom, WaveKernel, WaveOptions,
    RESIDUAL_COMPONENTS, VALUE_COMPONENTS,
};
pub use diagnostics::{
    eval_tiling, grid_sup_distance, partition_measures, random_points, sampled_sup_distance, slice_integral,
    tile_wave, wave_residual, PartitionMeasures, WaveResidual,
};
