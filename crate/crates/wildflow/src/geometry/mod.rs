//! Constraint sets, their convex hulls, and the extreme-point machinery that
//! drives every wave split.
//!
//! A state `(m, U)` lives in the space of vectors times trace-free symmetric
//! matrices. For fixed density and energy level the constraint set `K` is the
//! image of the unit sphere under `xi -> (sqrt(n rho q) xi, n q xi (x) xi - q I)`,
//! and its hull is characterized by the matrix inequality behind
//! [`hull_margin`].

mod decompose;
mod hull;
pub mod lp;
mod plan;
mod sampling;
mod state;

pub use decompose::{
    affine_rank, barycentric, certify_uniform_slack, hull_membership_lp, select_extreme_points, HullMembership,
    SimplexDecomposition,
};
pub use hull::{
    direction, dist_to_k, dist_to_k_planar, dist_to_k_with_direction, generalized_energy, hull_margin, k_point,
    maximize_on_sphere,
};
pub use plan::{hull_slack, plan_wave_step, plan_wave_step_with_weights, wave_direction, WavePlan};
pub use sampling::{sample_affine_rank, sample_extreme_neighborhood};
pub use state::{simplex_size, state_dim, ConstraintParams, StatePoint, WaveDirection};
