use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operators::{ScalarField, TorusGrid};

/// An axis-aligned box `[lo, hi)` carrying `rho + slope . (x - center)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxRegion {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub rho: f64,
    #[serde(default)]
    pub slope: [f64; 2],
}

impl BoxRegion {
    pub fn contains(&self, x: [f64; 2]) -> bool {
        (0..2).all(|i| x[i] >= self.lo[i] && x[i] < self.hi[i])
    }

    fn center(&self) -> [f64; 2] {
        [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1])]
    }
}

/// Density that is affine on each labelled region: label 0 is the
/// background, label `i + 1` is `regions[i]` (first match wins).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionDensity {
    pub background: f64,
    #[serde(default)]
    pub background_slope: [f64; 2],
    #[serde(default)]
    pub regions: Vec<BoxRegion>,
}

impl RegionDensity {
    pub fn constant(rho: f64) -> Self {
        Self { background: rho, background_slope: [0.0; 2], regions: Vec::new() }
    }

    pub fn validate(&self, grid: &TorusGrid) -> Result<()> {
        for (i, r) in self.regions.iter().enumerate() {
            if (0..2).any(|k| !(r.lo[k] < r.hi[k]) || r.lo[k] < 0.0 || r.hi[k] > grid.length) {
                return Err(invalid(format!("region {i} is not a box inside [0, {})^2", grid.length)));
            }
        }
        let low = self.min_density(grid);
        if !(low > 0.0) {
            return Err(invalid(format!("density must be positive, minimum is {low}")));
        }
        Ok(())
    }

    pub fn label_count(&self) -> usize {
        self.regions.len() + 1
    }

    pub fn label_at(&self, x: [f64; 2]) -> u32 {
        self.regions.iter().position(|r| r.contains(x)).map_or(0, |i| i as u32 + 1)
    }

    /// The affine formula of region `label`, evaluated at any point.
    pub fn eval_region(&self, label: u32, x: [f64; 2], length: f64) -> f64 {
        let (rho, slope, c) = match label {
            0 => (self.background, self.background_slope, [0.5 * length; 2]),
            l => {
                let r = &self.regions[l as usize - 1];
                (r.rho, r.slope, r.center())
            }
        };
        rho + slope[0] * (x[0] - c[0]) + slope[1] * (x[1] - c[1])
    }

    pub fn eval(&self, x: [f64; 2], length: f64) -> f64 {
        self.eval_region(self.label_at(x), x, length)
    }

    pub fn labels(&self, grid: &TorusGrid) -> Vec<u32> {
        (0..grid.nodes()).map(|i| self.label_at(grid.point(i))).collect()
    }

    pub fn sample(&self, grid: &TorusGrid) -> ScalarField {
        grid.sample(|x| self.eval(x, grid.length))
    }

    /// Largest region-wise gradient norm.
    pub fn max_slope(&self) -> f64 {
        std::iter::once(self.background_slope)
            .chain(self.regions.iter().map(|r| r.slope))
            .map(|s| s[0].hypot(s[1]))
            .fold(0.0, f64::max)
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.max_slope() == 0.0
    }

    /// Constant value on each label, in label order.
    pub fn region_values(&self) -> Vec<f64> {
        std::iter::once(self.background).chain(self.regions.iter().map(|r| r.rho)).collect()
    }

    fn min_density(&self, grid: &TorusGrid) -> f64 {
        self.sample(grid).values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// One Fourier mode `amplitude * cos(2 pi k . x / L + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityMode {
    pub k: [i32; 2],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Smooth periodic density `mean + sum of modes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModalDensity {
    pub mean: f64,
    #[serde(default)]
    pub modes: Vec<DensityMode>,
}

impl ModalDensity {
    pub fn sample(&self, grid: &TorusGrid) -> ScalarField {
        let base = 2.0 * PI / grid.length;
        grid.sample(|x| {
            self.mean
                + self
                    .modes
                    .iter()
                    .map(|m| m.amplitude * (base * (m.k[0] as f64 * x[0] + m.k[1] as f64 * x[1]) + m.phase).cos())
                    .sum::<f64>()
        })
    }
}
