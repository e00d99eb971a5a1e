use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::geometry::{wave_direction, SimplexDecomposition};
use crate::profiles::{PlateauCutoff, ProfileTower};
use crate::waves::{bound_from_coefficients, Correction, WaveKernel};

/// A kernel for the unit profile `v_j - v_i` with its error-bound coefficients.
#[derive(Debug)]
pub struct KernelEntry {
    pub kernel: WaveKernel,
    pub coefficients: [f64; 8],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelKey {
    pub simplex: u32,
    pub pair: (u8, u8),
    pub stage: u32,
    /// Logarithmic bin of the source scaling factor.
    pub bin: i32,
}

/// Everything one wave level needs that does not depend on the sample:
/// the cube cutoff in unit coordinates, one tower per quantized split weight,
/// and the kernels built on demand.
pub struct WaveCache {
    pub cutoff: PlateauCutoff,
    source: [[f64; 2]; 2],
    bin_base: f64,
    towers: Vec<OnceLock<(ProfileTower, [f64; 8])>>,
    kernels: RwLock<HashMap<KernelKey, Arc<KernelEntry>>>,
    max_doublings: u32,
}

impl WaveCache {
    pub fn new(source: [[f64; 2]; 2], mu_bins: usize, inner_fraction: f64, source_bin: f64, max_doublings: u32) -> Result<Self> {
        Ok(Self {
            cutoff: PlateauCutoff::new(vec![0.5; 3], vec![0.5; 3], inner_fraction)?,
            source,
            bin_base: (1.0 + source_bin).ln(),
            towers: (0..=mu_bins).map(|_| OnceLock::new()).collect(),
            kernels: RwLock::new(HashMap::new()),
            max_doublings,
        })
    }

    pub fn bins(&self) -> usize {
        self.towers.len() - 1
    }

    /// Tower for `mu1 = index / bins` and its derivative bounds.
    pub fn tower(&self, index: usize) -> Result<&(ProfileTower, [f64; 8])> {
        if let Some(t) = self.towers[index].get() {
            return Ok(t);
        }
        let mu1 = index as f64 / self.bins() as f64;
        let tower = ProfileTower::new(mu1, 0.02 * mu1.min(1.0 - mu1))?;
        let sups = tower.derivative_sups();
        Ok(self.towers[index].get_or_init(|| (tower, sups)))
    }

    /// Bin of a positive source scaling factor.
    pub fn source_bin(&self, factor: f64) -> i32 {
        (factor.ln() / self.bin_base).round() as i32
    }

    pub fn kernel(&self, key: KernelKey, simplex: &SimplexDecomposition) -> Result<Arc<KernelEntry>> {
        if let Some(k) = self.kernels.read().expect("kernel cache poisoned").get(&key) {
            return Ok(k.clone());
        }
        let (i, j) = (key.pair.0 as usize, key.pair.1 as usize);
        let direction = wave_direction(&simplex.vertices[i], &simplex.vertices[j], simplex.params.rho)?;
        let factor = (key.bin as f64 * self.bin_base).exp();
        let mut b = self.source;
        b.iter_mut().flatten().for_each(|x| *x *= factor);
        let kernel = WaveKernel::new(&direction, b, Correction::Full)?;
        let coefficients = kernel.bound_coefficients(&self.cutoff);
        let entry = Arc::new(KernelEntry { kernel, coefficients });
        let mut map = self.kernels.write().expect("kernel cache poisoned");
        Ok(map.entry(key).or_insert(entry).clone())
    }

    pub fn kernel_count(&self) -> usize {
        self.kernels.read().expect("kernel cache poisoned").len()
    }

    /// Smallest `2^m` whose error bound for a profile of size `scale` is at most `eps`.
    pub fn frequency(&self, entry: &KernelEntry, sups: &[f64; 8], scale: f64, eps: f64) -> Result<(f64, u32)> {
        let mut lambda = 1.0;
        for m in 0..=self.max_doublings {
            let bound = scale * bound_from_coefficients(&entry.coefficients, sups, lambda);
            if bound <= eps {
                return Ok((lambda, m));
            }
            if m == self.max_doublings {
                return Err(Error::FrequencyCap { lambda, bound, eps });
            }
            lambda *= 2.0;
        }
        unreachable!()
    }
}
