//! Periodic profiles, their antiderivative towers, and smooth cutoffs.
//!
//! Everything is an exact piecewise polynomial, so derivatives and integrals
//! are evaluated in closed form rather than by differencing.

mod cutoff;
mod poly;
mod tower;

pub use cutoff::{ramp_derivative_sups, PlateauCutoff, TimeCutoff, CUTOFF_ORDER};
pub use poly::{smoothstep_coefficients, Piece, PiecewisePoly};
pub use tower::{build_profile_tower, square_profile, PeriodicProfile, ProfileTower, TOWER_DEPTH};
