use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::expr::{Expr, Table};
use crate::error::{invalid, Error, Result};
use crate::geometry::{StatePoint, WaveDirection};
use crate::profiles::{PlateauCutoff, ProfileTower};

/// Which correction terms the atom carries. Anything but `Full` is a test hook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Correction {
    #[default]
    Full,
    /// Drop the source terms from the momentum corrector (the homogeneous wave).
    WithoutSource,
    /// Drop the momentum corrector `V''` entirely.
    WithoutCorrector,
}

/// Value components of an atom: `n1, n2, V11, V12, V22`.
pub const VALUE_COMPONENTS: usize = 5;
/// Residual components: `div n`, the two components of `d_t n + div V - B n`,
/// and the two components of the homogeneous `d_t n + div V`.
pub const RESIDUAL_COMPONENTS: usize = 5;

/// Symbolic tables of a localized plane wave for a fixed direction, profile and
/// source matrix. Independent of frequency, cutoff box and profile tower.
#[derive(Debug, Clone)]
pub struct WaveKernel {
    pub xi: [f64; 2],
    pub tau: f64,
    pub source: [[f64; 2]; 2],
    pub correction: Correction,
    pub value: Table,
    pub residual: Table,
}

impl WaveKernel {
    pub fn new(direction: &WaveDirection, source: [[f64; 2]; 2], correction: Correction) -> Result<Self> {
        if direction.xi.len() != 2 || direction.profile.dim() != 2 {
            return Err(invalid("localized waves are implemented for two space dimensions"));
        }
        let xi = [direction.xi[0], direction.xi[1]];
        let nu = [xi[0], xi[1], direction.tau];
        let nb = direction.profile.m().to_vec();
        let vb = direction.profile.u_matrix();

        let p = Expr::profile_times_cutoff();
        let l3 = p.laplacian(&nu).laplacian(&nu).laplacian(&nu);
        let q = Expr::profile_times_cutoff_derivative(0)
            .scale(nb[0])
            .add(&Expr::profile_times_cutoff_derivative(1).scale(nb[1]));
        let l2q = q.laplacian(&nu).laplacian(&nu);

        let mut n = [Expr::zero(), Expr::zero()];
        for i in 0..2 {
            n[i] = l3.scale(nb[i]).axpy(-1.0, &l2q.d(i, &nu));
        }

        let lp = p.laplacian(&nu);
        let mut f = [Expr::zero(), Expr::zero()];
        for i in 0..2 {
            let a = Expr::profile_times_cutoff_derivative(2)
                .scale(nb[i])
                .add(&Expr::profile_times_cutoff_derivative(0).scale(vb[i][0]))
                .add(&Expr::profile_times_cutoff_derivative(1).scale(vb[i][1]));
            let mut fi = a.laplacian(&nu).axpy(-1.0, &q.d(2, &nu).d(i, &nu));
            if correction == Correction::Full {
                for l in 0..2 {
                    if source[i][l] != 0.0 {
                        let inner = lp.scale(nb[l]).axpy(-1.0, &q.d(l, &nu));
                        fi = fi.axpy(-source[i][l], &inner);
                    }
                }
            }
            f[i] = fi;
        }

        let mut v = [[Expr::zero(), Expr::zero()], [Expr::zero(), Expr::zero()]];
        for i in 0..2 {
            for k in 0..2 {
                v[i][k] = l3.scale(vb[i][k]);
            }
        }
        if correction != Correction::WithoutCorrector {
            let g = [f[0].laplacian(&nu), f[1].laplacian(&nu)];
            let div_g = g[0].d(0, &nu).add(&g[1].d(1, &nu));
            for i in 0..2 {
                for k in 0..2 {
                    let mut r = g[i].d(k, &nu).add(&g[k].d(i, &nu));
                    if i == k {
                        r = r.axpy(-1.0, &div_g);
                    }
                    v[i][k] = v[i][k].axpy(-1.0, &r);
                }
            }
        }

        let div = n[0].d(0, &nu).add(&n[1].d(1, &nu));
        let mut mom = [Expr::zero(), Expr::zero()];
        let mut plain = [Expr::zero(), Expr::zero()];
        for i in 0..2 {
            plain[i] = n[i].d(2, &nu).add(&v[i][0].d(0, &nu)).add(&v[i][1].d(1, &nu));
            let mut m = plain[i].clone();
            for l in 0..2 {
                m = m.axpy(-source[i][l], &n[l]);
            }
            mom[i] = m;
        }

        let value = Table::from_exprs(&[n[0].clone(), n[1].clone(), v[0][0].clone(), v[0][1].clone(), v[1][1].clone()]);
        let residual = Table::from_exprs(&[div, mom[0].clone(), mom[1].clone(), plain[0].clone(), plain[1].clone()]);
        Ok(Self { xi, tau: direction.tau, source, correction, value, residual })
    }

    /// `A_j`, the cutoff-weighted size of all non-leading value terms carrying
    /// `j` derivatives of the profile.
    pub fn bound_coefficients(&self, cutoff: &PlateauCutoff) -> [f64; 8] {
        let ax = [cutoff.axis_sups(0), cutoff.axis_sups(1), cutoff.axis_sups(2)];
        let mut a = [0.0; 8];
        for t in &self.value.terms {
            if t.j == 6 && t.beta == [0, 0, 0] {
                continue;
            }
            let phi = ax[0][t.beta[0] as usize] * ax[1][t.beta[1] as usize] * ax[2][t.beta[2] as usize];
            a[t.j as usize] += iso_norm(&t.c) * phi;
        }
        a
    }

    /// `sum_j A_j lambda^(j-6) sup|h6^(j)|` over all non-leading value terms: a
    /// rigorous bound for `sup |w~ - wbar h0(lambda theta) phi|`.
    pub fn error_bound(&self, lambda: f64, tower: &ProfileTower, cutoff: &PlateauCutoff) -> f64 {
        bound_from_coefficients(&self.bound_coefficients(cutoff), &tower.derivative_sups(), lambda)
    }
}

/// Evaluates `sum_j a_j lambda^(j-6) hs_j`.
pub fn bound_from_coefficients(a: &[f64; 8], hs: &[f64; 8], lambda: f64) -> f64 {
    (0..8).map(|j| a[j] * lambda.powi(j as i32 - 6) * hs[j]).sum()
}

/// Isometric norm of `(n1, n2, V11, V12, V22)`.
pub fn iso_norm(c: &[f64]) -> f64 {
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + 2.0 * c[3] * c[3] + c[4] * c[4]).sqrt()
}

/// How the oscillation frequency is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaRule {
    /// Double until the analytic bound of [`WaveKernel::error_bound`] is below `eps`.
    AnalyticBound,
    /// Double until the sup-distance to the segment, sampled on a grid with the
    /// given number of points per axis, is below `eps`.
    SampledGrid { per_axis: usize },
    /// Use the hint as is (test hook).
    Fixed,
}

/// Construction options shared by every atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveOptions {
    /// Profile smoothing width as a fraction of `min(mu1, mu2)`.
    pub delta_fraction: f64,
    pub correction: Correction,
    pub rule: LambdaRule,
    /// Cap on the frequency, as a multiple of the hint.
    pub cap_factor: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self { delta_fraction: 0.02, correction: Correction::Full, rule: LambdaRule::AnalyticBound, cap_factor: 1048576.0 }
    }
}

/// A localized plane wave attached to a space-time box.
#[derive(Debug, Clone)]
pub struct WaveAtom {
    pub base: StatePoint,
    pub w1: StatePoint,
    pub w2: StatePoint,
    pub mu1: f64,
    pub mu2: f64,
    pub direction: WaveDirection,
    pub lambda: f64,
    pub cutoff: PlateauCutoff,
    pub tower: Option<ProfileTower>,
    pub source_matrix: [[f64; 2]; 2],
    pub kernel: Option<Arc<WaveKernel>>,
    /// Analytic bound on the distance to the segment at the chosen frequency.
    pub error_bound: f64,
}

/// Direction `(tau, xi)` for a profile in the wave cone, with `xi` orthogonal to
/// the momentum jump.
pub fn cone_direction(profile: &StatePoint) -> Result<WaveDirection> {
    let m = profile.m();
    let nm = (m[0] * m[0] + m[1] * m[1]).sqrt();
    if nm < 1e-14 * (1.0 + profile.norm()) {
        return Err(invalid("profile has no momentum jump"));
    }
    let mut xi = vec![-m[1] / nm, m[0] / nm];
    if xi[0] < 0.0 || (xi[0] == 0.0 && xi[1] < 0.0) {
        xi.iter_mut().for_each(|x| *x = -*x);
    }
    let u = profile.u_matrix();
    let vx = [u[0][0] * xi[0] + u[0][1] * xi[1], u[1][0] * xi[0] + u[1][1] * xi[1]];
    let tau = -(m[0] * vx[0] + m[1] * vx[1]) / (nm * nm);
    let d = WaveDirection { tau, xi, profile: profile.clone() };
    if d.compatibility_defect() > 1e-10 * profile.norm() {
        return Err(invalid(format!(
            "profile is not in the wave cone (defect {:.3e})",
            d.compatibility_defect()
        )));
    }
    Ok(d)
}

impl WaveAtom {
    /// Build an atom with direction derived from `w2 - w1`.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        base: &StatePoint,
        w1: &StatePoint,
        w2: &StatePoint,
        cutoff: PlateauCutoff,
        eps: f64,
        source: [[f64; 2]; 2],
        lambda_hint: f64,
        opts: &WaveOptions,
    ) -> Result<Self> {
        let wbar = w2.sub(w1);
        if wbar.norm() < 1e-14 * (1.0 + base.norm()) {
            return Ok(Self::zero(base, cutoff, source));
        }
        let direction = cone_direction(&wbar)?;
        Self::build_with_direction(base, w1, w2, direction, cutoff, eps, source, lambda_hint, opts, None)
    }

    fn zero(base: &StatePoint, cutoff: PlateauCutoff, source: [[f64; 2]; 2]) -> Self {
        Self {
            base: base.clone(),
            w1: base.clone(),
            w2: base.clone(),
            mu1: 0.5,
            mu2: 0.5,
            direction: WaveDirection { tau: 0.0, xi: vec![1.0, 0.0], profile: StatePoint::zero(2) },
            lambda: 1.0,
            cutoff,
            tower: None,
            source_matrix: source,
            kernel: None,
            error_bound: 0.0,
        }
    }

    /// Build an atom for a known direction; an existing kernel may be reused
    /// when its direction, profile and source matrix match.
    #[allow(clippy::too_many_arguments)]
    pub fn build_with_direction(
        base: &StatePoint,
        w1: &StatePoint,
        w2: &StatePoint,
        direction: WaveDirection,
        cutoff: PlateauCutoff,
        eps: f64,
        source: [[f64; 2]; 2],
        lambda_hint: f64,
        opts: &WaveOptions,
        kernel: Option<Arc<WaveKernel>>,
    ) -> Result<Self> {
        if !(eps > 0.0) || !(lambda_hint > 0.0) {
            return Err(invalid("eps and lambda_hint must be positive"));
        }
        if cutoff.axes() != 3 {
            return Err(invalid("cutoff must live in (x1, x2, t)"));
        }
        let wbar = w2.sub(w1);
        let amp2 = wbar.norm().powi(2);
        let mu1 = w2.sub(base).coords().iter().zip(wbar.coords()).map(|(a, b)| a * b).sum::<f64>() / amp2;
        let mu2 = 1.0 - mu1;
        let recon = w1.scale(mu1).add(&w2.scale(mu2));
        if !(mu1 > 0.0 && mu1 < 1.0) || recon.dist(base) > 1e-9 * (1.0 + base.norm() + wbar.norm()) {
            return Err(invalid("base must be a strict convex combination of the endpoints"));
        }
        if direction.profile.dist(&wbar) > 1e-9 * (1.0 + wbar.norm()) {
            return Err(invalid("direction profile does not match w2 - w1"));
        }
        if direction.compatibility_defect() > 1e-9 * wbar.norm() {
            return Err(invalid("w2 - w1 is not in the wave cone for the given direction"));
        }
        let kernel = match kernel {
            Some(k) => k,
            None => Arc::new(WaveKernel::new(&direction, source, opts.correction)?),
        };
        let delta = opts.delta_fraction * mu1.min(mu2);
        let tower = ProfileTower::new(mu1, delta)?;
        let mut atom = Self {
            base: base.clone(),
            w1: w1.clone(),
            w2: w2.clone(),
            mu1,
            mu2,
            direction,
            lambda: lambda_hint,
            cutoff,
            tower: Some(tower),
            source_matrix: source,
            kernel: Some(kernel),
            error_bound: 0.0,
        };
        atom.select_lambda(eps, lambda_hint, opts)?;
        Ok(atom)
    }

    fn select_lambda(&mut self, eps: f64, hint: f64, opts: &WaveOptions) -> Result<()> {
        let kernel = self.kernel.clone().unwrap();
        let tower = self.tower.clone().unwrap();
        let cap = hint * opts.cap_factor;
        let mut lambda = match opts.rule {
            LambdaRule::Fixed => hint,
            _ => hint * (1.0 + 0.5 * (5f64.sqrt() - 1.0) * 1e-3),
        };
        loop {
            self.lambda = lambda;
            let bound = kernel.error_bound(lambda, &tower, &self.cutoff);
            self.error_bound = bound;
            let ok = match opts.rule {
                LambdaRule::Fixed => true,
                LambdaRule::AnalyticBound => bound <= eps,
                LambdaRule::SampledGrid { per_axis } => {
                    bound <= eps || super::diagnostics::grid_sup_distance(self, per_axis) <= eps
                }
            };
            if ok {
                return Ok(());
            }
            if lambda * 2.0 > cap {
                return Err(Error::FrequencyCap { lambda, bound, eps });
            }
            lambda *= 2.0;
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.direction.profile.norm()
    }

    pub fn is_zero(&self) -> bool {
        self.kernel.is_none()
    }

    pub fn phase(&self, z: &[f64; 3]) -> f64 {
        let c = &self.cutoff.center;
        self.lambda
            * (self.direction.xi[0] * (z[0] - c[0]) + self.direction.xi[1] * (z[1] - c[1]) + self.direction.tau * (z[2] - c[2]))
    }

    fn inputs(&self, z: &[f64; 3]) -> Option<([f64; 8], [[f64; 8]; 3])> {
        if self.is_zero() || !self.cutoff.contains(z) {
            return None;
        }
        let hd = self.tower.as_ref().unwrap().eval_derivatives(self.phase(z));
        let ax = [
            self.cutoff.axis_derivatives(0, z[0]),
            self.cutoff.axis_derivatives(1, z[1]),
            self.cutoff.axis_derivatives(2, z[2]),
        ];
        Some((hd, ax))
    }

    /// `(n1, n2, V11, V12, V22)` of the perturbation at `z = (x1, x2, t)`.
    pub fn evaluate_raw(&self, z: &[f64; 3]) -> [f64; VALUE_COMPONENTS] {
        let mut out = [0.0; VALUE_COMPONENTS];
        if let Some((hd, ax)) = self.inputs(z) {
            self.kernel.as_ref().unwrap().value.eval(self.lambda, &hd, &ax, &mut out);
        }
        out
    }

    /// The perturbation as a state.
    pub fn evaluate(&self, z: &[f64; 3]) -> StatePoint {
        let v = self.evaluate_raw(z);
        StatePoint::planar([v[0], v[1]], 0.5 * (v[2] - v[4]), v[3])
    }

    /// Analytic residuals at `z`, see [`RESIDUAL_COMPONENTS`].
    pub fn residual_raw(&self, z: &[f64; 3]) -> [f64; RESIDUAL_COMPONENTS] {
        let mut out = [0.0; RESIDUAL_COMPONENTS];
        if let Some((hd, ax)) = self.inputs(z) {
            self.kernel.as_ref().unwrap().residual.eval(self.lambda, &hd, &ax, &mut out);
        }
        out
    }

    /// Distance of `base + w~(z)` to the segment `[w1, w2]`.
    pub fn segment_distance(&self, z: &[f64; 3]) -> f64 {
        let w = self.base.add(&self.evaluate(z));
        segment_distance(&w, &self.w1, &self.w2)
    }

    /// Same atom at another frequency (diagnostics).
    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut a = self.clone();
        a.lambda = lambda;
        if let (Some(k), Some(t)) = (&a.kernel, &a.tower) {
            a.error_bound = k.error_bound(lambda, t, &a.cutoff);
        }
        a
    }
}

pub fn segment_distance(w: &StatePoint, a: &StatePoint, b: &StatePoint) -> f64 {
    let d = b.sub(a);
    let dd: f64 = d.coords().iter().map(|x| x * x).sum();
    if dd == 0.0 {
        return w.dist(a);
    }
    let s = (w.sub(a).coords().iter().zip(d.coords()).map(|(x, y)| x * y).sum::<f64>() / dd).clamp(0.0, 1.0);
    w.dist(&a.axpy(s, &d))
}
