use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `p(rho) = a rho^gamma` with `a > 0`, `gamma > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    pub a: f64,
    pub gamma: f64,
}

impl PressureLaw {
    pub fn new(a: f64, gamma: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(invalid(format!("pressure scale must be positive, got {a}")));
        }
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(invalid(format!("adiabatic exponent must exceed 1, got {gamma}")));
        }
        Ok(Self { a, gamma })
    }

    pub fn p(&self, rho: f64) -> f64 {
        self.a * rho.powf(self.gamma)
    }

    pub fn dp(&self, rho: f64) -> f64 {
        self.a * self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// Internal energy `I(rho) = rho * int_0^rho p(r) / r^2 dr = a rho^gamma / (gamma - 1)`.
    pub fn internal_energy(&self, rho: f64) -> f64 {
        self.a * rho.powf(self.gamma) / (self.gamma - 1.0)
    }

    pub fn d_internal_energy(&self, rho: f64) -> f64 {
        self.a * self.gamma * rho.powf(self.gamma - 1.0) / (self.gamma - 1.0)
    }

    /// `I(rho)` from its integral definition by tanh-sinh quadrature, which
    /// tolerates the integrable endpoint singularity of `p(r) / r^2` at 0.
    pub fn internal_energy_quadrature(&self, rho: f64, tol: f64) -> f64 {
        rho * tanh_sinh(&|r: f64| self.p(r) / r / r, rho, tol)
    }
}

/// `int_0^b f` where `f` may be singular at 0, evaluated only at interior points.
fn tanh_sinh(f: &dyn Fn(f64) -> f64, b: f64, tol: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let node = |t: f64| -> (f64, f64) {
        let y = FRAC_PI_2 * t.sinh();
        let w = FRAC_PI_2 * t.cosh() / (y.cosh() * y.cosh());
        let left = 1.0 / (1.0 + (2.0 * y).exp());
        (b * left, b * w * 0.5)
    };
    let sum_at = |h: f64, offset: bool| -> f64 {
        let mut total = 0.0;
        let mut k = if offset { 1 } else { 0 };
        loop {
            let t = k as f64 * h;
            if t > 6.5 {
                break;
            }
            for s in if t == 0.0 { vec![1.0] } else { vec![1.0, -1.0] } {
                let (x, w) = node(s * t);
                if x > 0.0 && x < b && w > 0.0 {
                    let v = w * f(x);
                    if v.is_finite() {
                        total += v;
                    }
                }
            }
            k += if offset { 2 } else { 1 };
        }
        total
    };
    let mut h = 0.5;
    let mut raw = sum_at(h, false);
    let mut est = h * raw;
    for _ in 0..12 {
        h *= 0.5;
        raw += sum_at(h, true);
        let next = h * raw;
        if (next - est).abs() <= tol * next.abs().max(1.0) {
            return next;
        }
        est = next;
    }
    est
}

/// `beta = max(0, lambda_max(-(B + B^T)/2))` for a square matrix given by rows.
pub fn beta_of(b: &[Vec<f64>]) -> Result<f64> {
    let n = b.len();
    if n == 0 || b.iter().any(|r| r.len() != n) {
        return Err(invalid("source matrix must be square"));
    }
    let s = nalgebra::DMatrix::from_fn(n, n, |i, j| -0.5 * (b[i][j] + b[j][i]));
    let top = s.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(top.max(0.0))
}

/// A constant `2 x 2` source matrix with its damping coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceMatrix {
    pub matrix: [[f64; 2]; 2],
}

impl SourceMatrix {
    pub const ZERO: Self = Self { matrix: [[0.0; 2]; 2] };
    pub const ROTATION: Self = Self { matrix: [[0.0, 1.0], [-1.0, 0.0]] };
    pub const DAMPING: Self = Self { matrix: [[-1.0, 0.0], [0.0, -1.0]] };

    pub fn beta(&self) -> f64 {
        beta_of(&[self.matrix[0].to_vec(), self.matrix[1].to_vec()]).expect("2x2 is square")
    }

    pub fn is_antisymmetric(&self, tol: f64) -> bool {
        let b = &self.matrix;
        b[0][0].abs() <= tol && b[1][1].abs() <= tol && (b[0][1] + b[1][0]).abs() <= tol
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let b = &self.matrix;
        [b[0][0] * v[0] + b[0][1] * v[1], b[1][0] * v[0] + b[1][1] * v[1]]
    }

    /// `m . B m`.
    pub fn quadratic(&self, m: [f64; 2]) -> f64 {
        let bm = self.apply(m);
        m[0] * bm[0] + m[1] * bm[1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn beta_examples() {
        assert_eq!(SourceMatrix::ROTATION.beta(), 0.0);
        assert!((SourceMatrix::DAMPING.beta() - 1.0).abs() < 1e-14);
        let b = beta_of(&[vec![1.0, 0.0], vec![0.0, -3.0]]).unwrap();
        assert!((b - 3.0).abs() < 1e-14);
        assert!(beta_of(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn antisymmetric_source_does_no_work() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let b = SourceMatrix { matrix: [[0.0, 2.5], [-2.5, 0.0]] };
        assert!(b.is_antisymmetric(0.0));
        for _ in 0..100 {
            let m = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            assert!(b.quadratic(m).abs() <= 1e-14 * (m[0] * m[0] + m[1] * m[1]));
        }
    }

    #[test]
    fn internal_energy_matches_quadrature() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let law = PressureLaw::new(rng.gen_range(0.1..3.0), rng.gen_range(1.2..3.0)).unwrap();
            let rho = rng.gen_range(0.1..4.0);
            let exact = law.internal_energy(rho);
            let quad = law.internal_energy_quadrature(rho, 1e-13);
            assert!((exact - quad).abs() <= 1e-10 * (1.0 + exact), "{law:?} {rho}: {exact} vs {quad}");
        }
        assert!(PressureLaw::new(1.0, 1.0).is_err());
    }
}
