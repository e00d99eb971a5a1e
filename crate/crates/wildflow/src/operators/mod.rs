//! Spectral solvers on the periodic square and Neumann solvers on squares.
//!
//! All torus operators work on node grids `x = (i, j) L / N` with FFTs. First
//! derivative multipliers vanish on the Nyquist lines, so operators that invert
//! a divergence cannot reach those modes; they are removed together with the
//! mean and reported in [`Unresolved`]. Field dumps are raw little-endian `f64`
//! files with a JSON sidecar, see [`FieldDump`].

mod dump;
mod neumann;
mod spectral;
mod torus;

pub use dump::{FieldDump, FieldMeta};
pub use neumann::{neumann_poisson_cube, CubeGrid, NeumannSolution};
pub use torus::{
    leray_project, poisson_solve, r_padded, r_torus, random_band_limited, DeviatorField, PaddedReport, PoissonSolution, ScalarField,
    TorusGrid, Unresolved, VectorField,
};

#[cfg(test)]
mod tests;
