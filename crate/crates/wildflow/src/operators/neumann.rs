use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectral::{fft2, wavenumber};
use crate::error::{invalid, Result};

/// Node grid on the closed square `origin + [0, side]^2` with `intervals`
/// cells per axis, so `(intervals + 1)^2` nodes, row-major with `x1` slowest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeGrid {
    pub origin: [f64; 2],
    pub side: f64,
    pub intervals: usize,
}

impl CubeGrid {
    pub fn new(origin: [f64; 2], side: f64, intervals: usize) -> Result<Self> {
        if intervals < 4 || !intervals.is_power_of_two() {
            return Err(invalid(format!("cube intervals must be a power of two >= 4, got {intervals}")));
        }
        if !(side > 0.0) {
            return Err(invalid("cube side must be positive"));
        }
        Ok(Self { origin, side, intervals })
    }

    pub fn per_axis(&self) -> usize {
        self.intervals + 1
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        let p = self.per_axis();
        let h = self.side / self.intervals as f64;
        [self.origin[0] + (idx / p) as f64 * h, self.origin[1] + (idx % p) as f64 * h]
    }

    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        (0..self.per_axis().pow(2)).map(|i| f(self.point(i))).collect()
    }

    /// Trapezoid weights of the nodes (they sum to `side^2`).
    pub fn weights(&self) -> Vec<f64> {
        let p = self.per_axis();
        let h = self.side / self.intervals as f64;
        let w1 = |i: usize| if i == 0 || i == self.intervals { 0.5 * h } else { h };
        (0..p * p).map(|k| w1(k / p) * w1(k % p)).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeumannSolution {
    pub grid: CubeGrid,
    pub psi: Vec<f64>,
    /// `d psi / dx1`, `d psi / dx2` at the nodes.
    pub gradient: [Vec<f64>; 2],
    pub removed_mean: f64,
    /// `sup |d psi / d nu|` over the boundary nodes.
    pub face_derivative: f64,
    /// `sup |lap psi - (f - mean f)|` over the nodes.
    pub residual: f64,
}

fn extend(v: &[f64], m: usize) -> Vec<Complex64> {
    let p = m + 1;
    let e = 2 * m;
    let refl = |j: usize| if j <= m { j } else { e - j };
    let mut out = vec![Complex64::new(0.0, 0.0); e * e];
    for i in 0..e {
        for j in 0..e {
            out[i * e + j] = Complex64::new(v[refl(i) * p + refl(j)], 0.0);
        }
    }
    out
}

fn restrict(c: &[Complex64], m: usize) -> Vec<f64> {
    let p = m + 1;
    let e = 2 * m;
    (0..p * p).map(|k| c[(k / p) * e + k % p].re).collect()
}

/// Zero-mean `psi` with `lap psi = f - mean(f)` on the square and vanishing
/// normal derivative, through the cosine basis of the even reflection.
pub fn neumann_poisson_cube(f: &[f64], grid: &CubeGrid) -> Result<NeumannSolution> {
    let m = grid.intervals;
    let p = grid.per_axis();
    if f.len() != p * p {
        return Err(invalid(format!("expected {} node values, got {}", p * p, f.len())));
    }
    let e = 2 * m;
    let mut c = extend(f, m);
    fft2(&mut c, e, e, false);
    let removed_mean = c[0].re / (e * e) as f64;
    let base = PI / grid.side;
    let k: Vec<f64> = (0..e).map(|i| base * wavenumber(i, e) as f64).collect();
    let ik: Vec<Complex64> =
        (0..e).map(|i| if i == m { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, k[i]) }).collect();
    let mut lap_f = c.clone();
    for i in 0..e {
        for j in 0..e {
            let l = -(k[i] * k[i] + k[j] * k[j]);
            let idx = i * e + j;
            c[idx] = if l == 0.0 { Complex64::new(0.0, 0.0) } else { c[idx] / l };
            lap_f[idx] = c[idx] * l;
        }
    }
    let mut g1 = c.clone();
    let mut g2 = c.clone();
    for i in 0..e {
        for j in 0..e {
            g1[i * e + j] *= ik[i];
            g2[i * e + j] *= ik[j];
        }
    }
    for a in [&mut c, &mut g1, &mut g2, &mut lap_f] {
        fft2(a, e, e, true);
    }
    let psi = restrict(&c, m);
    let gradient = [restrict(&g1, m), restrict(&g2, m)];
    let lap = restrict(&lap_f, m);
    let residual = lap.iter().zip(f).fold(0.0f64, |acc, (l, v)| acc.max((l - (v - removed_mean)).abs()));
    let mut face_derivative: f64 = 0.0;
    for t in 0..p {
        for (comp, idx) in [(0, t), (0, m * p + t), (1, t * p), (1, t * p + m)] {
            face_derivative = face_derivative.max(gradient[comp][idx].abs());
        }
    }
    Ok(NeumannSolution { grid: *grid, psi, gradient, removed_mean, face_derivative, residual })
}

impl NeumannSolution {
    /// Trapezoid approximation of the boundary integral of the normal derivative.
    pub fn boundary_flux(&self) -> f64 {
        let m = self.grid.intervals;
        let p = m + 1;
        let h = self.grid.side / m as f64;
        let w = |t: usize| if t == 0 || t == m { 0.5 * h } else { h };
        let mut total = 0.0;
        for t in 0..p {
            total += w(t) * (self.gradient[0][m * p + t] - self.gradient[0][t]);
            total += w(t) * (self.gradient[1][t * p + m] - self.gradient[1][t * p]);
        }
        total
    }

    pub fn grad_sup(&self) -> f64 {
        self.gradient.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }
}
