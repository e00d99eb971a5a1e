use serde::{Deserialize, Serialize};

use super::poly::{compose_affine, smoothstep_coefficients, Piece, PiecewisePoly};
use crate::error::{invalid, Error, Result};

/// Depth of the antiderivative tower: `h_0, ..., h_6`.
pub const TOWER_DEPTH: usize = 6;

/// A 1-periodic, mean-zero piecewise polynomial profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicProfile {
    pub poly: PiecewisePoly,
}

impl PeriodicProfile {
    fn wrap(s: f64) -> f64 {
        let r = s - s.floor();
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.poly.eval(Self::wrap(s))
    }

    pub fn deriv(&self, s: f64, order: usize) -> f64 {
        self.poly.deriv(Self::wrap(s), order)
    }

    pub fn mean(&self) -> f64 {
        self.poly.integral()
    }

    pub fn sup_abs(&self) -> f64 {
        self.poly.sup_abs(0)
    }
}

/// Smoothed two-valued profile `h0`: `-mu2` on `(0, mu1)`, `mu1` on `(mu1, 1)`,
/// joined by C^6 ramps of total width `0.9 delta`.
pub fn square_profile(mu1: f64, delta: f64) -> Result<PeriodicProfile> {
    if !(mu1 > 0.0 && mu1 < 1.0) {
        return Err(invalid(format!("mu1 must lie in (0, 1), got {mu1}")));
    }
    let mu2 = 1.0 - mu1;
    let limit = 0.5 * mu1.min(mu2);
    if !(delta > 0.0) || delta >= limit {
        return Err(Error::SmoothingTooWide { delta, limit });
    }
    let w = 0.45 * delta;
    let s = smoothstep_coefficients();
    let neg = |c: Vec<f64>| -> Vec<f64> { c.into_iter().map(|x| -x).collect() };
    let shift = |mut c: Vec<f64>, v: f64| -> Vec<f64> {
        c[0] += v;
        c
    };
    let pieces = vec![
        Piece { left: 0.0, width: 0.5 * w, coef: shift(neg(compose_affine(&s, 0.5, 0.5)), mu1) },
        Piece::constant(0.5 * w, mu1 - w, -mu2),
        Piece { left: mu1 - 0.5 * w, width: w, coef: shift(s.clone(), -mu2) },
        Piece::constant(mu1 + 0.5 * w, mu2 - w, mu1),
        Piece { left: 1.0 - 0.5 * w, width: 0.5 * w, coef: shift(neg(compose_affine(&s, 0.5, 0.0)), mu1) },
    ];
    let mut poly = PiecewisePoly { pieces };
    let mean = poly.integral();
    poly.add_constant(-mean);
    Ok(PeriodicProfile { poly })
}

/// `h_0, ..., h_6` with `h_{k+1}' = h_k` and every `h_k` of mean zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileTower {
    pub mu1: f64,
    pub delta: f64,
    pub levels: Vec<PeriodicProfile>,
    /// Upper bounds for `sup |h_k|`, `k = 0..=6`, followed by one for `sup |h_0'|`.
    ///
    /// A mean-zero periodic antiderivative satisfies `sup |h_{k+1}| <= sup |h_k| / 2`,
    /// which is cheap and rigorous; the slope bound uses the ramp's exact maximum.
    pub sup_bounds: Vec<f64>,
}

/// Successive mean-zero antiderivatives of `h0`.
pub fn build_profile_tower(h0: &PeriodicProfile) -> ProfileTower {
    let mut levels = vec![h0.clone()];
    for _ in 0..TOWER_DEPTH {
        let mut next = levels.last().unwrap().poly.antiderivative();
        let mean = next.integral();
        next.add_constant(-mean);
        levels.push(PeriodicProfile { poly: next });
    }
    let top = h0.poly.pieces.iter().map(|p| p.coef[0].abs()).fold(0.0, f64::max);
    let mut sup_bounds: Vec<f64> = (0..=TOWER_DEPTH).map(|k| top * 0.5f64.powi(k as i32)).collect();
    let slope = h0
        .poly
        .pieces
        .iter()
        .filter(|p| p.coef.len() > 1)
        .map(|p| ramp_slope_max() / p.width * if p.width < 0.75 * max_width(h0) { 0.5 } else { 1.0 })
        .fold(0.0, f64::max);
    sup_bounds.push(slope);
    ProfileTower { mu1: f64::NAN, delta: f64::NAN, levels, sup_bounds }
}

fn max_width(h0: &PeriodicProfile) -> f64 {
    h0.poly.pieces.iter().filter(|p| p.coef.len() > 1).map(|p| p.width).fold(0.0, f64::max)
}

fn ramp_slope_max() -> f64 {
    use std::sync::OnceLock;
    static SLOPE: OnceLock<f64> = OnceLock::new();
    *SLOPE.get_or_init(|| {
        let s = smoothstep_coefficients();
        super::poly::derivative_at(&s, 1, 0.5)
    })
}

impl ProfileTower {
    pub fn new(mu1: f64, delta: f64) -> Result<Self> {
        let h0 = square_profile(mu1, delta)?;
        let mut t = build_profile_tower(&h0);
        t.mu1 = mu1;
        t.delta = delta;
        Ok(t)
    }

    /// `[h6^(0), ..., h6^(7)] = [h6, h5, ..., h0, h0']` at phase `s`.
    pub fn eval_derivatives(&self, s: f64) -> [f64; 8] {
        let r = PeriodicProfile::wrap(s);
        let idx = self.levels[0].poly.locate(r);
        let mut out = [0.0; 8];
        for j in 0..=TOWER_DEPTH {
            let p = &self.levels[TOWER_DEPTH - j].poly.pieces[idx];
            out[j] = p.deriv_local(0, (r - p.left) / p.width);
        }
        let p = &self.levels[0].poly.pieces[idx];
        out[7] = p.deriv_local(1, (r - p.left) / p.width);
        out
    }

    /// Bounds for `sup |h6^(j)|`, `j = 0..=7`.
    pub fn derivative_sups(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for j in 0..=TOWER_DEPTH {
            out[j] = self.sup_bounds[TOWER_DEPTH - j];
        }
        out[7] = self.sup_bounds[7];
        out
    }

    /// Breakpoints of the pieces (shared by every level).
    pub fn breakpoints(&self) -> Vec<f64> {
        self.levels[0].poly.pieces.iter().map(|p| p.left).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_profile_values_and_mean() {
        let h = square_profile(0.3, 0.01).unwrap();
        assert!((h.eval(0.15) + 0.7).abs() < 1e-14);
        assert!((h.eval(0.65) - 0.3).abs() < 1e-14);
        assert!(h.mean().abs() < 1e-15);
        assert!((h.eval(0.999_999_9) - h.eval(1.0 + 0.999_999_9)).abs() < 1e-11);
        let jump = h.eval(0.3 + 0.003) - h.eval(0.3 - 0.003);
        assert!((jump - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_wide_smoothing() {
        assert!(matches!(square_profile(0.3, 0.2), Err(Error::SmoothingTooWide { .. })));
    }

    #[test]
    fn smoothing_region_is_small() {
        let mu1 = 0.4;
        let delta = 0.05;
        let h = square_profile(mu1, delta).unwrap();
        let n = 200_000;
        let bad = (0..n)
            .filter(|&i| {
                let s = (i as f64 + 0.5) / n as f64;
                let ideal = if s < mu1 { mu1 - 1.0 } else { mu1 };
                (h.eval(s) - ideal).abs() > 1e-13
            })
            .count();
        assert!((bad as f64 / n as f64) < delta);
    }

    #[test]
    fn tower_is_mean_zero_and_chained() {
        let t = ProfileTower::new(0.37, 0.02).unwrap();
        for (k, h) in t.levels.iter().enumerate() {
            assert!(h.mean().abs() < 1e-14, "level {k} mean {}", h.mean());
        }
        for k in 1..t.levels.len() {
            for s in [0.05, 0.2, 0.5, 0.9] {
                assert!((t.levels[k].deriv(s, 1) - t.levels[k - 1].eval(s)).abs() < 1e-12);
            }
            assert!(t.levels[k].sup_abs() <= t.levels[0].sup_abs() + 1e-15);
        }
        for (k, h) in t.levels.iter().enumerate() {
            assert!(h.sup_abs() <= t.sup_bounds[k] * (1.0 + 1e-12));
        }
        assert!(t.levels[0].poly.sup_abs(1) <= t.sup_bounds[7] * (1.0 + 1e-9));
        assert!(t.levels[0].poly.sup_abs(1) >= 0.99 * t.sup_bounds[7]);
    }
}
