use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzSpec;
use crate::error::{config_error, Result};
use crate::scheme::IterationConfig;
use crate::verify::VerifyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Ansatz,
    Iterate,
    IterateInitial,
    Verify,
    Geometry,
}

/// A decomposition query for `mode = geometry`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub rho: f64,
    pub q: f64,
    #[serde(default = "two")]
    pub dimension: usize,
    /// Isometric coordinates of the target; the origin when absent.
    #[serde(default)]
    pub target: Option<Vec<f64>>,
    /// Random directions for the independent hull-membership check.
    #[serde(default = "membership_samples")]
    pub membership_samples: usize,
}

fn two() -> usize {
    2
}

fn membership_samples() -> usize {
    400
}

/// Slice dumps to verify instead of building an ansatz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub dir: PathBuf,
    /// Decay constant to check `sup max(|rho - rho_sharp|, |m|) <= kappa e^{-beta t}` against.
    #[serde(default)]
    pub kappa: Option<f64>,
}

/// The JSON run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ansatz: Option<AnsatzSpec>,
    #[serde(default)]
    pub iteration: IterationConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub geometry: Option<GeometrySpec>,
    #[serde(default)]
    pub input: Option<InputSpec>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = crate::parse_json(&text)?;
        Ok(cfg)
    }

    /// Checks that the sections the mode needs are present and valid.
    pub fn validate(&self) -> Result<()> {
        self.iteration.validate()?;
        self.verify.validate()?;
        match self.mode {
            Mode::Geometry if self.geometry.is_none() => return Err(config_error("/geometry", "required for mode geometry")),
            Mode::Ansatz | Mode::Iterate | Mode::IterateInitial if self.ansatz.is_none() => {
                return Err(config_error("/ansatz", "required for this mode"))
            }
            Mode::Verify if self.ansatz.is_none() => {
                return Err(config_error("/ansatz", "pressure and source are needed to verify"))
            }
            _ => {}
        }
        if let Some(input) = &self.input {
            if !input.dir.join("slices.json").is_file() {
                return Err(config_error("/input/dir", format!("{} has no slices.json", input.dir.display())));
            }
        }
        Ok(())
    }
}
