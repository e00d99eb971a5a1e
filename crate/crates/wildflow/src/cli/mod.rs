//! Batch runs driven by a JSON configuration.
//!
//! A run builds an ansatz, optionally iterates or verifies it, and writes
//! everything under one output directory:
//!
//! | path | contents |
//! |------|----------|
//! | `slices/` | the subsolution `(rho, m, U, q)` per time slice, raw little-endian `f64` with JSON sidecars |
//! | `samples/` | one Monte Carlo realization of the iterated state, same format |
//! | `dist/` | chain-averaged distance to the constraint set per slice |
//! | `initial/` | coarse and oscillating initial momentum (`iterate-initial`) |
//! | `stages.csv` | one row per stage |
//! | `census.json` | state clusters per region |
//! | `verification.json` | weak residuals, energy inequality, constraint and decay checks |
//! | `geometry.json` | extreme points of a decomposition query |
//! | `manifest.json` | resolved config, seed, version, certificates and sha256 of every file |
//!
//! Given the configuration and seed, every file is reproduced bit for bit.

mod config;
mod manifest;
mod run;

#[cfg(test)]
mod tests;

pub use config::{GeometrySpec, InputSpec, Mode, RunConfig};
pub use manifest::{file_entries, sha256_hex, FileEntry, Manifest};
pub use run::{read_run_slices, resolve, run, RunError, RunOptions, RunSummary};
