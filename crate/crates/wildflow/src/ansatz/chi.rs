use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::profiles::TimeCutoff;

/// Which differential inequality the curve must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ChiMode {
    /// `chi' = -2 beta chi - c0 (chi^{3/2} + chi + chi^{1/2} + 1) eps` on `[0, 1)`,
    /// above the floor `C (h'^2 eps + |h'| + |h''| + h) eps`.
    GeneralSource { beta: f64, eps: f64, c0: f64, floor_constant: f64 },
    /// `chi' = -C3 rho' chi^{3/2} - C2 chi - C1 rho' chi^{1/2} - C0` on `[0, T)`,
    /// above `p_hat + C T^{-2} theta^2`, then constant.
    Lipschitz { c: [f64; 4], varrho: f64, p_hat: f64, theta: f64, floor_constant: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiParams {
    pub mode: ChiMode,
    pub chi0: f64,
    /// End of the integration interval: 1 for `GeneralSource`, `T` for `Lipschitz`.
    pub horizon: f64,
    pub step: f64,
}

impl ChiParams {
    pub fn general_source(beta: f64, eps: f64, c0: f64, chi0: f64) -> Self {
        Self { mode: ChiMode::GeneralSource { beta, eps, c0, floor_constant: 0.25 }, chi0, horizon: 1.0, step: 1e-3 }
    }
}

/// A certified solution of the `chi` inequality on a uniform RK4 grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChiCurve {
    pub params: ChiParams,
    pub times: Vec<f64>,
    pub chi: Vec<f64>,
    pub dchi: Vec<f64>,
    pub floor: Vec<f64>,
    /// `min (chi - floor)` over the grid.
    pub min_margin: f64,
    /// `|chi_h(T) - chi_{h/2}(T)|`.
    pub richardson_gap: f64,
    pub monotone: bool,
    /// Test hook: `chi(t) + slope_offset * t` violates the inequality when positive.
    pub slope_offset: f64,
}

fn rhs(mode: &ChiMode, chi: f64) -> f64 {
    let c = chi.max(0.0);
    match *mode {
        ChiMode::GeneralSource { beta, eps, c0, .. } => {
            -2.0 * beta * chi - c0 * (c.powf(1.5) + c + c.sqrt() + 1.0) * eps
        }
        ChiMode::Lipschitz { c: k, varrho, .. } => {
            -k[3] * varrho * c.powf(1.5) - k[2] * chi - k[1] * varrho * c.sqrt() - k[0]
        }
    }
}

fn floor_at(mode: &ChiMode, t: f64, horizon: f64, h: &TimeCutoff) -> f64 {
    match *mode {
        ChiMode::GeneralSource { eps, floor_constant, .. } => {
            let v = h.eval(t);
            floor_constant * (v[1] * v[1] * eps + v[1].abs() + v[2].abs() + v[0]) * eps
        }
        ChiMode::Lipschitz { p_hat, theta, floor_constant, .. } => {
            if t < horizon {
                p_hat + floor_constant * theta * theta / (horizon * horizon)
            } else {
                p_hat
            }
        }
    }
}

fn rk4(mode: &ChiMode, chi0: f64, step: f64, steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = chi0;
    out.push(y);
    for _ in 0..steps {
        let k1 = rhs(mode, y);
        let k2 = rhs(mode, y + 0.5 * step * k1);
        let k3 = rhs(mode, y + 0.5 * step * k2);
        let k4 = rhs(mode, y + step * k3);
        y += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(y);
    }
    out
}

/// Integrate the `chi` equation and certify positivity and the strictness floor.
pub fn solve_chi(params: ChiParams) -> Result<ChiCurve> {
    if !(params.chi0 > 0.0) || !(params.horizon > 0.0) || !(params.step > 0.0) {
        return Err(invalid("chi0, horizon and step must be positive"));
    }
    match params.mode {
        ChiMode::GeneralSource { beta, eps, c0, floor_constant } => {
            if beta < 0.0 || eps < 0.0 || c0 < 0.0 || floor_constant < 0.0 {
                return Err(invalid("chi constants must be non-negative"));
            }
        }
        ChiMode::Lipschitz { c, varrho, theta, floor_constant, .. } => {
            if c.iter().any(|&v| v < 0.0) || varrho < 0.0 || theta < 0.0 || floor_constant < 0.0 {
                return Err(invalid("chi constants must be non-negative"));
            }
        }
    }
    let steps = (params.horizon / params.step).round().max(1.0) as usize;
    let step = params.horizon / steps as f64;
    let chi = rk4(&params.mode, params.chi0, step, steps);
    let fine = rk4(&params.mode, params.chi0, 0.5 * step, 2 * steps);
    let h = TimeCutoff::new();
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * step).collect();
    let mut floor = Vec::with_capacity(times.len());
    let mut min_margin = f64::INFINITY;
    for (&t, &c) in times.iter().zip(&chi) {
        let f = floor_at(&params.mode, t, params.horizon, &h);
        if !(c > f) || !(c > 0.0) {
            return Err(Error::ChiInfeasible { time: t, chi: c, floor: f });
        }
        min_margin = min_margin.min(c - f);
        floor.push(f);
    }
    if let ChiMode::Lipschitz { p_hat, .. } = params.mode {
        let end = *chi.last().unwrap();
        if !(end > p_hat) {
            return Err(Error::ChiInfeasible { time: params.horizon, chi: end, floor: p_hat });
        }
    }
    let dchi: Vec<f64> = chi.iter().map(|&c| rhs(&params.mode, c)).collect();
    let monotone = chi.windows(2).all(|w| w[1] <= w[0]);
    let richardson_gap = (chi.last().unwrap() - fine.last().unwrap()).abs();
    Ok(ChiCurve { params, times, chi, dchi, floor, min_margin, richardson_gap, monotone, slope_offset: 0.0 })
}

impl ChiCurve {
    /// `(chi, chi')` at `t >= 0` by cubic Hermite interpolation; beyond the
    /// horizon the curve continues as `chi(1) e^{-2 beta (t-1)}` or as a constant.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let horizon = self.params.horizon;
        let (v, d) = if t >= horizon {
            let end = *self.chi.last().unwrap();
            match self.params.mode {
                ChiMode::GeneralSource { beta, .. } => {
                    let e = end * (-2.0 * beta * (t - horizon)).exp();
                    (e, -2.0 * beta * e)
                }
                ChiMode::Lipschitz { .. } => (end, 0.0),
            }
        } else {
            let t = t.max(0.0);
            let h = self.times[1] - self.times[0];
            let i = ((t / h).floor() as usize).min(self.times.len() - 2);
            let s = (t - self.times[i]) / h;
            let (y0, y1, d0, d1) = (self.chi[i], self.chi[i + 1], self.dchi[i] * h, self.dchi[i + 1] * h);
            let s2 = s * s;
            let s3 = s2 * s;
            let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1;
            let d = ((6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * d0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * d1) / h;
            (v, d)
        };
        (v + self.slope_offset * t, d + self.slope_offset)
    }

    pub fn with_slope_offset(&self, offset: f64) -> Self {
        Self { slope_offset: offset, ..self.clone() }
    }

    /// Largest relative change `|chi'| dt / chi` over one step of length `dt`.
    pub fn max_relative_change(&self, dt: f64) -> f64 {
        self.chi.iter().zip(&self.dchi).map(|(c, d)| (d + self.slope_offset).abs() * dt / c).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_source_keeps_chi_constant() {
        let c = solve_chi(ChiParams::general_source(0.0, 0.0, 10.0, 0.3)).unwrap();
        assert!(c.chi.iter().all(|&v| (v - 0.3).abs() < 1e-15));
        assert_eq!(c.eval(0.37).0, 0.3);
    }

    #[test]
    fn small_eps_is_feasible_and_decreasing() {
        let c = solve_chi(ChiParams::general_source(1.0, 1e-3, 10.0, 0.1)).unwrap();
        assert!(c.monotone);
        assert!(c.min_margin > 0.0);
        assert!(c.richardson_gap < 1e-8, "{}", c.richardson_gap);
        let (v, d) = c.eval(0.5);
        assert!(v > 0.0 && d < 0.0);
        let (v1, _) = c.eval(1.5);
        assert!((v1 - c.chi.last().unwrap() * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn large_eps_is_infeasible() {
        let err = solve_chi(ChiParams::general_source(1.0, 1.0, 10.0, 0.1)).unwrap_err();
        assert!(matches!(err, Error::ChiInfeasible { .. }));
    }

    #[test]
    fn hermite_interpolation_matches_grid() {
        let c = solve_chi(ChiParams::general_source(1.0, 1e-3, 10.0, 0.1)).unwrap();
        for i in [0, 17, 500, 999] {
            let (v, d) = c.eval(c.times[i]);
            assert!((v - c.chi[i]).abs() < 1e-14);
            assert!((d - c.dchi[i]).abs() < 1e-9);
        }
        let shifted = c.with_slope_offset(0.5);
        assert!((shifted.eval(0.2).1 - c.eval(0.2).1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lipschitz_mode_reports_blow_down() {
        let mode = |t: f64| ChiParams {
            mode: ChiMode::Lipschitz { c: [1.0, 1.0, 1.0, 1.0], varrho: 1.0, p_hat: 2.0, theta: 0.01, floor_constant: 1.0 },
            chi0: 4.0,
            horizon: t,
            step: 1e-3,
        };
        let ok = solve_chi(mode(0.1)).unwrap();
        assert!(ok.eval(3.0).0 > 2.0 && ok.eval(3.0).1 == 0.0);
        match solve_chi(mode(2.0)) {
            Err(Error::ChiInfeasible { time, .. }) => assert!(time > 0.1 && time < 2.0),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
