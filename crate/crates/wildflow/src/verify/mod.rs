//! Independent checks of dumped fields.
//!
//! Everything here starts from slices `(rho, m, U, q)` read back from disk:
//! the weak continuity and momentum functionals, the energy inequality
//! against nonnegative tests, pointwise distances to the constraint set, and
//! the decay of relaxing states. Time integrals interpolate the slices with
//! piecewise cubics and are evaluated at two quadrature refinements; space
//! integrals are exact trapezoid sums against trigonometric tests.

mod config;
mod constraint;
mod family;
mod report;
mod residual;

#[cfg(test)]
mod tests;

pub use config::VerifyConfig;
pub use constraint::{constraint_field, ConstraintSlice, ConstraintSummary};
pub use family::{Parity, Ramp, TestFunction, TestFunctionFamily};
pub use report::{decay_check, verify_dumps, verify_slices, VerificationReport};
pub use residual::{admissibility_residual, field_scale, weak_residual, AdmissibilityValue, WeakResidual};

use crate::ansatz::Slice;

/// Adds `amount` times a smooth bump of `radius` around `center` to the
/// momentum of every slice. Used to check that the residuals notice.
pub fn add_momentum_blob(slices: &mut [Slice], center: [f64; 2], radius: f64, amount: [f64; 2]) {
    for s in slices {
        let grid = s.grid();
        let l = grid.length;
        for k in 0..grid.nodes() {
            let x = grid.point(k);
            let wrap = |d: f64| d - l * (d / l).round();
            let r = wrap(x[0] - center[0]).hypot(wrap(x[1] - center[1])) / radius;
            if r < 1.0 {
                let b = (0.5 * std::f64::consts::PI * r).cos().powi(2);
                s.m.components[0][k] += amount[0] * b;
                s.m.components[1][k] += amount[1] * b;
            }
        }
    }
}
