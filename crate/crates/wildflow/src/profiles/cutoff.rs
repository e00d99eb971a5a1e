use serde::{Deserialize, Serialize};

use super::poly::{derivative_at, smoothstep_coefficients, Piece, PiecewisePoly};
use crate::error::{invalid, Result};

/// Highest derivative order tabulated for cutoffs.
pub const CUTOFF_ORDER: usize = 7;

/// Tensor-product plateau cutoff on an axis-aligned box in `(x_1, .., x_n, t)`.
///
/// Along each axis the factor equals 1 on the inner `inner_fraction` of the
/// half-width and falls to 0 at the box faces through the degree-13 ramp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauCutoff {
    pub center: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub inner_fraction: f64,
    #[serde(skip, default = "smoothstep_coefficients")]
    ramp: Vec<f64>,
}

impl PlateauCutoff {
    pub fn new(center: Vec<f64>, half_widths: Vec<f64>, inner_fraction: f64) -> Result<Self> {
        if center.len() != half_widths.len() || center.is_empty() {
            return Err(invalid("cutoff center and half-widths must have the same positive length"));
        }
        if half_widths.iter().any(|&r| !(r > 0.0)) {
            return Err(invalid("cutoff half-widths must be positive"));
        }
        if !(inner_fraction > 0.0 && inner_fraction < 1.0) {
            return Err(invalid("inner fraction must lie in (0, 1)"));
        }
        Ok(Self { center, half_widths, inner_fraction, ramp: smoothstep_coefficients() })
    }

    pub fn axes(&self) -> usize {
        self.center.len()
    }

    /// Derivatives of order `0..=7` of the one-dimensional factor along `axis`.
    pub fn axis_derivatives(&self, axis: usize, z: f64) -> [f64; 8] {
        let r = self.half_widths[axis];
        let a = self.inner_fraction;
        let y = (z - self.center[axis]) / r;
        let mut out = [0.0; 8];
        let ay = y.abs();
        if ay <= a {
            out[0] = 1.0;
        } else if ay < 1.0 {
            let u = (1.0 - ay) / (1.0 - a);
            let du = if y > 0.0 { -1.0 } else { 1.0 } / ((1.0 - a) * r);
            let mut f = 1.0;
            for (k, o) in out.iter_mut().enumerate() {
                *o = derivative_at(&self.ramp, k, u) * f;
                f *= du;
            }
        }
        out
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        (0..self.axes()).map(|i| self.axis_derivatives(i, z[i])[0]).product()
    }

    /// Relative measure of the set where the cutoff differs from 1.
    pub fn transition_fraction(&self) -> f64 {
        1.0 - self.inner_fraction.powi(self.axes() as i32)
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        (0..self.axes()).all(|i| (z[i] - self.center[i]).abs() < self.half_widths[i])
    }

    /// `sup |d^k psi / dz^k|` along `axis` for `k = 0..=7`.
    pub fn axis_sups(&self, axis: usize) -> [f64; 8] {
        let r = self.half_widths[axis];
        let a = self.inner_fraction;
        let ramp = ramp_derivative_sups();
        let mut out = [0.0; 8];
        for k in 0..=CUTOFF_ORDER {
            out[k] = ramp[k] / ((1.0 - a) * r).powi(k as i32);
        }
        out[0] = 1.0;
        out
    }
}

/// `sup_{[0,1]} |S^(k)|` of the degree-13 ramp, `k = 0..=7`, computed once.
pub fn ramp_derivative_sups() -> [f64; 8] {
    use std::sync::OnceLock;
    static SUPS: OnceLock<[f64; 8]> = OnceLock::new();
    *SUPS.get_or_init(|| {
        let ramp = smoothstep_coefficients();
        let grid = 20_000;
        let mut out = [0.0; 8];
        for (k, o) in out.iter_mut().enumerate() {
            *o = (0..=grid).map(|i| derivative_at(&ramp, k, i as f64 / grid as f64).abs()).fold(0.0, f64::max);
        }
        out
    })
}

/// Even time cutoff `h` with `h = 1` near 0, support in `(-1, 1)`, `0 <= h <= 1`,
/// and `|h'| <= 2`.
///
/// Built as `h(t) = 1 - c * int_0^|t| g` where `g` is a plateau bump on
/// `[0.02, 0.98]` and `c = 1 / int g`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeCutoff {
    pub poly: PiecewisePoly,
    pub scale: f64,
}

impl TimeCutoff {
    pub fn new() -> Self {
        let s = smoothstep_coefficients();
        let falling: Vec<f64> = super::poly::compose_affine(&s, -1.0, 1.0);
        let (lo, hi) = (0.02, 0.98);
        let ramp = 0.36;
        let bump = PiecewisePoly {
            pieces: vec![
                Piece::constant(0.0, lo, 0.0),
                Piece { left: lo, width: ramp, coef: s.clone() },
                Piece::constant(lo + ramp, hi - lo - 2.0 * ramp, 1.0),
                Piece { left: hi - ramp, width: ramp, coef: falling },
            ],
        };
        let total = bump.integral();
        let mut poly = bump.antiderivative();
        poly.scale(-1.0 / total);
        poly.add_constant(1.0);
        Self { poly, scale: 1.0 / total }
    }

    /// `[h, h', h'']` at `t`, scaled to support `(-T, T)` when `period = T`.
    pub fn eval_scaled(&self, t: f64, horizon: f64) -> [f64; 3] {
        let x = t / horizon;
        let ax = x.abs();
        if ax >= self.poly.end() {
            return [0.0; 3];
        }
        let sgn = if x < 0.0 { -1.0 } else { 1.0 };
        [
            self.poly.deriv(ax, 0).max(0.0),
            sgn * self.poly.deriv(ax, 1) / horizon,
            self.poly.deriv(ax, 2) / (horizon * horizon),
        ]
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        self.eval_scaled(t, 1.0)
    }

    pub fn sup_derivatives(&self) -> [f64; 3] {
        [1.0, self.poly.sup_abs(1), self.poly.sup_abs(2)]
    }
}

impl Default for TimeCutoff {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_values_and_transition_fraction() {
        let c = PlateauCutoff::new(vec![0.0; 3], vec![1.0, 2.0, 0.5], 0.8).unwrap();
        assert_eq!(c.eval(&[0.5, 1.0, 0.1]), 1.0);
        assert_eq!(c.eval(&[1.0, 0.0, 0.0]), 0.0);
        assert!((c.transition_fraction() - (1.0 - 0.512)).abs() < 1e-15);
        let mid = c.eval(&[0.9, 0.0, 0.0]);
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn plateau_derivatives_match_differences() {
        let c = PlateauCutoff::new(vec![0.2], vec![0.7], 0.4).unwrap();
        let z = 0.2 + 0.7 * 0.63;
        let h = 1e-5;
        let d = c.axis_derivatives(0, z);
        let fd = (c.axis_derivatives(0, z + h)[0] - c.axis_derivatives(0, z - h)[0]) / (2.0 * h);
        assert!((d[1] - fd).abs() < 1e-6 * (1.0 + d[1].abs()));
        let fd2 = (c.axis_derivatives(0, z + h)[2] - c.axis_derivatives(0, z - h)[2]) / (2.0 * h);
        assert!((d[3] - fd2).abs() < 1e-5 * (1.0 + d[3].abs()));
    }

    #[test]
    fn time_cutoff_properties() {
        let h = TimeCutoff::new();
        assert_eq!(h.eval(0.0)[0], 1.0);
        assert_eq!(h.eval(0.01)[0], 1.0);
        assert!(h.eval(0.99)[0].abs() < 1e-14);
        assert_eq!(h.eval(1.2), [0.0; 3]);
        let sups = h.sup_derivatives();
        assert!(sups[1] <= 2.0, "|h'| = {}", sups[1]);
        for t in [-0.7, -0.2, 0.3, 0.6] {
            let v = h.eval(t)[0];
            assert!((0.0..=1.0).contains(&v));
            assert!((h.eval(t)[0] - h.eval(-t)[0]).abs() < 1e-15);
        }
    }
}
