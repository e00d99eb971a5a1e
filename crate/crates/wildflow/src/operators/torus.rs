use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectral::{forward, inverse_real, Axis};
use crate::error::{invalid, Error, Result};

/// Uniform node grid on the periodic square `[0, L)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub resolution: usize,
    pub length: f64,
}

impl TorusGrid {
    pub fn new(resolution: usize, length: f64) -> Result<Self> {
        if resolution < 16 || !resolution.is_power_of_two() {
            return Err(invalid(format!("resolution must be a power of two >= 16, got {resolution}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(invalid(format!("period must be positive, got {length}")));
        }
        Ok(Self { resolution, length })
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.resolution as f64
    }

    pub fn nodes(&self) -> usize {
        self.resolution * self.resolution
    }

    /// Coordinates of node `idx` (row-major, `x1` slowest).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        [(idx / self.resolution) as f64 * h, (idx % self.resolution) as f64 * h]
    }

    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> ScalarField {
        ScalarField { grid: *self, values: (0..self.nodes()).map(|i| f(self.point(i))).collect() }
    }

    fn axis(&self) -> Axis {
        Axis::new(self.resolution, self.length)
    }
}

fn check(a: &TorusGrid, b: &TorusGrid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub grid: TorusGrid,
    pub components: [Vec<f64>; 2],
}

/// Symmetric trace-free field stored as `(R11, R12)`, with `R22 = -R11`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviatorField {
    pub grid: TorusGrid,
    pub r11: Vec<f64>,
    pub r12: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, values: vec![0.0; grid.nodes()] }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    pub fn gradient(&self) -> VectorField {
        let ax = self.grid.axis();
        let n = self.grid.resolution;
        let c = forward(&self.values, n);
        let mut c1 = c.clone();
        let mut c2 = c;
        for i in 0..n {
            for j in 0..n {
                c1[i * n + j] *= ax.ik[i];
                c2[i * n + j] *= ax.ik[j];
            }
        }
        VectorField { grid: self.grid, components: [inverse_real(c1, n), inverse_real(c2, n)] }
    }

    pub fn laplacian(&self) -> ScalarField {
        let ax = self.grid.axis();
        let n = self.grid.resolution;
        let mut c = forward(&self.values, n);
        for i in 0..n {
            for j in 0..n {
                c[i * n + j] *= ax.lap[i] + ax.lap[j];
            }
        }
        ScalarField { grid: self.grid, values: inverse_real(c, n) }
    }
}

impl VectorField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, components: [vec![0.0; grid.nodes()], vec![0.0; grid.nodes()]] }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let vals: Vec<[f64; 2]> = (0..grid.nodes()).map(|i| f(grid.point(i))).collect();
        Self { grid, components: [vals.iter().map(|v| v[0]).collect(), vals.iter().map(|v| v[1]).collect()] }
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.components[0]).max(sup(&self.components[1]))
    }

    pub fn mean(&self) -> [f64; 2] {
        let n = self.grid.nodes() as f64;
        [self.components[0].iter().sum::<f64>() / n, self.components[1].iter().sum::<f64>() / n]
    }

    pub fn divergence(&self) -> ScalarField {
        let ax = self.grid.axis();
        let n = self.grid.resolution;
        let mut c = forward(&self.components[0], n);
        let c2 = forward(&self.components[1], n);
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                c[k] = c[k] * ax.ik[i] + c2[k] * ax.ik[j];
            }
        }
        ScalarField { grid: self.grid, values: inverse_real(c, n) }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check(&self.grid, &other.grid)?;
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
        Ok(Self {
            grid: self.grid,
            components: [d(&self.components[0], &other.components[0]), d(&self.components[1], &other.components[1])],
        })
    }

    pub fn linear_combination(a: f64, f: &Self, b: f64, g: &Self) -> Result<Self> {
        check(&f.grid, &g.grid)?;
        let c = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| a * u + b * v).collect::<Vec<_>>();
        Ok(Self { grid: f.grid, components: [c(&f.components[0], &g.components[0]), c(&f.components[1], &g.components[1])] })
    }
}

impl DeviatorField {
    pub fn r22(&self) -> Vec<f64> {
        self.r11.iter().map(|v| -v).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.r11).max(sup(&self.r12))
    }

    /// Row-wise divergence `(d1 R11 + d2 R12, d1 R12 - d2 R11)`.
    pub fn divergence(&self) -> VectorField {
        let row1 = VectorField { grid: self.grid, components: [self.r11.clone(), self.r12.clone()] };
        let row2 = VectorField { grid: self.grid, components: [self.r12.clone(), self.r22()] };
        VectorField { grid: self.grid, components: [row1.divergence().values, row2.divergence().values] }
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        let a = self.r11.iter().zip(&other.r11).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        let b = self.r12.iter().zip(&other.r12).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        a.max(b)
    }
}

/// Result of [`poisson_solve`]: the solution and the mean that was removed.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub psi: ScalarField,
    pub removed_mean: f64,
}

/// Zero-mean `psi` with `lap psi = f - mean(f)`.
pub fn poisson_solve(f: &ScalarField, mean_free: bool) -> PoissonSolution {
    let n = f.grid.resolution;
    let ax = f.grid.axis();
    let mut c = forward(&f.values, n);
    let removed_mean = if mean_free { 0.0 } else { c[0].re / (n * n) as f64 };
    for i in 0..n {
        for j in 0..n {
            let l = ax.lap[i] + ax.lap[j];
            c[i * n + j] = if i == 0 && j == 0 { Complex64::new(0.0, 0.0) } else { c[i * n + j] / l };
        }
    }
    PoissonSolution { psi: ScalarField { grid: f.grid, values: inverse_real(c, n) }, removed_mean }
}

/// Spectral data removed before inverting the divergence: the mean, and the
/// Nyquist lines on which first derivatives vanish.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Unresolved {
    pub mean: [f64; 2],
    pub nyquist_sup: f64,
}

fn split_unresolved(f: &VectorField) -> ([Vec<Complex64>; 2], Unresolved) {
    let n = f.grid.resolution;
    let nyq = n / 2;
    let mut out = [forward(&f.components[0], n), forward(&f.components[1], n)];
    let mut mean = [0.0; 2];
    let mut nyquist_sup: f64 = 0.0;
    for (c, m) in out.iter_mut().zip(mean.iter_mut()) {
        *m = c[0].re / (n * n) as f64;
        c[0] = Complex64::new(0.0, 0.0);
        let mut lines = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                if i == nyq || j == nyq {
                    lines[i * n + j] = c[i * n + j];
                    c[i * n + j] = Complex64::new(0.0, 0.0);
                }
            }
        }
        nyquist_sup = nyquist_sup.max(sup(&inverse_real(lines, n)));
    }
    (out, Unresolved { mean, nyquist_sup })
}

/// Symmetric trace-free `R` with `div R = f - mean(f)` up to the unresolved
/// Nyquist lines, which are reported.
///
/// For two space dimensions the general formula reduces to
/// `R = grad g + grad g^T - (div g) I` with `g = lap^{-1}(f - mean f)`.
pub fn r_torus(f: &VectorField) -> (DeviatorField, Unresolved) {
    let n = f.grid.resolution;
    let ax = f.grid.axis();
    let ([g1, g2], unresolved) = split_unresolved(f);
    let mut r11 = vec![Complex64::new(0.0, 0.0); n * n];
    let mut r12 = r11.clone();
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let l = ax.lap[i] + ax.lap[j];
            if l == 0.0 {
                continue;
            }
            let (a, b) = (g1[k] / l, g2[k] / l);
            r11[k] = a * ax.ik[i] - b * ax.ik[j];
            r12[k] = b * ax.ik[i] + a * ax.ik[j];
        }
    }
    (DeviatorField { grid: f.grid, r11: inverse_real(r11, n), r12: inverse_real(r12, n) }, unresolved)
}

/// Divergence-free part `v - grad lap^{-1} div v`; the mean is kept.
pub fn leray_project(v: &VectorField) -> VectorField {
    let n = v.grid.resolution;
    let ax = v.grid.axis();
    let mut c1 = forward(&v.components[0], n);
    let mut c2 = forward(&v.components[1], n);
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let l = ax.lap[i] + ax.lap[j];
            if l == 0.0 {
                continue;
            }
            let (k1, k2) = (ax.ik[i], ax.ik[j]);
            let div = c1[k] * k1 + c2[k] * k2;
            let kk = k1 * k1 + k2 * k2;
            if kk.re == 0.0 {
                continue;
            }
            c1[k] -= k1 * div / kk;
            c2[k] -= k2 * div / kk;
        }
    }
    VectorField { grid: v.grid, components: [inverse_real(c1, n), inverse_real(c2, n)] }
}

/// Whole-plane surrogate: `f` sampled on `grid` is embedded in a torus `pad`
/// times larger, inverted there, and restricted back.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PaddedReport {
    pub pad: usize,
    /// `sup |div R - f|` on the original grid, which includes the periodization error.
    pub residual: f64,
    pub removed_mean: [f64; 2],
}

pub fn r_padded(f: &VectorField, pad: usize) -> Result<(DeviatorField, PaddedReport)> {
    if pad == 0 || !pad.is_power_of_two() {
        return Err(invalid("padding factor must be a power of two"));
    }
    let n = f.grid.resolution;
    let big = TorusGrid::new(n * pad, f.grid.length * pad as f64)?;
    let nb = big.resolution;
    let mut e = VectorField::zeros(big);
    for i in 0..n {
        for j in 0..n {
            for c in 0..2 {
                e.components[c][i * nb + j] = f.components[c][i * n + j];
            }
        }
    }
    let (rb, un) = r_torus(&e);
    let divb = rb.divergence();
    let mut r = DeviatorField { grid: f.grid, r11: vec![0.0; n * n], r12: vec![0.0; n * n] };
    let mut residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (k, kb) = (i * n + j, i * nb + j);
            r.r11[k] = rb.r11[kb];
            r.r12[k] = rb.r12[kb];
            for c in 0..2 {
                residual = residual.max((divb.components[c][kb] - f.components[c][k]).abs());
            }
        }
    }
    Ok((r, PaddedReport { pad, residual, removed_mean: un.mean }))
}

/// Random trigonometric polynomial with integer modes `|k|_inf <= modes`,
/// unit-scale Gaussian coefficients.
pub fn random_band_limited(grid: TorusGrid, modes: usize, seed: u64) -> ScalarField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let base = 2.0 * std::f64::consts::PI / grid.length;
    let m = modes as i64;
    let mut terms = Vec::new();
    for a in -m..=m {
        for b in 0..=m {
            if b == 0 && a < 0 {
                continue;
            }
            let c: f64 = rng.gen_range(-1.0..1.0);
            let s: f64 = rng.gen_range(-1.0..1.0);
            terms.push((a as f64 * base, b as f64 * base, c, s));
        }
    }
    grid.sample(|x| terms.iter().map(|(k1, k2, c, s)| {
        let th = k1 * x[0] + k2 * x[1];
        c * th.cos() + s * th.sin()
    }).sum())
}
