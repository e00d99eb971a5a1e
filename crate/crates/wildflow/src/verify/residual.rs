use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::VerifyConfig;
use super::family::{TestFunction, TestFunctionFamily};
use crate::ansatz::{PressureLaw, Slice, SourceMatrix};
use crate::error::{invalid, Error, Result};
use crate::quad::gauss_legendre;

/// Residual pair of the weak formulation for one test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    pub test: String,
    /// Signed continuity functional.
    pub continuity: f64,
    /// Signed momentum functional for `psi = phi e_1` and `psi = phi e_2`.
    pub momentum: [f64; 2],
    /// The part `int int psi . B m` of `momentum`.
    pub source_work: [f64; 2],
    /// `C^2` norm of the test function.
    pub norm: f64,
    pub tolerance: f64,
    /// `|continuity|` and `|momentum|` divided by the norm and the box measure.
    pub normalized: [f64; 2],
    /// Whether doubling the time quadrature changed the values by less than the resolution ratio.
    pub resolved: bool,
    pub pass: bool,
}

/// Left side of the energy inequality for one nonnegative test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityValue {
    pub test: String,
    pub value: f64,
    pub norm: f64,
    pub tolerance: f64,
    pub normalized: f64,
    pub resolved: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Raw {
    continuity: f64,
    momentum: [f64; 2],
    source_work: [f64; 2],
    energy: f64,
}

/// Nodal integrands of one slice.
struct Integrands {
    rho: Vec<f64>,
    m: [Vec<f64>; 2],
    u: [[Vec<f64>; 2]; 2],
    pressure: Vec<f64>,
    bm: [Vec<f64>; 2],
    energy: Vec<f64>,
    flux: [Vec<f64>; 2],
    q: Vec<f64>,
}

impl Integrands {
    fn new(s: &Slice, plaw: &PressureLaw, source: &SourceMatrix) -> Self {
        let n = s.rho.values.len();
        let (mut bm, mut flux) = ([vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]]);
        let (mut pressure, mut energy) = (vec![0.0; n], vec![0.0; n]);
        for k in 0..n {
            let (r, q) = (s.rho.values[k], s.q.values[k]);
            let m = [s.m.components[0][k], s.m.components[1][k]];
            let b = source.apply(m);
            let e = plaw.internal_energy(r) + q;
            pressure[k] = plaw.p(r) + q;
            energy[k] = e;
            for d in 0..2 {
                bm[d][k] = b[d];
                flux[d][k] = (e + plaw.p(r)) * m[d] / r;
            }
        }
        let r22 = s.u.r22();
        Self {
            rho: s.rho.values.clone(),
            m: s.m.components.clone(),
            u: [[s.u.r11.clone(), s.u.r12.clone()], [s.u.r12.clone(), r22]],
            pressure,
            bm,
            energy,
            flux,
            q: s.q.values.clone(),
        }
    }

    fn sup(&self) -> f64 {
        let mut all: Vec<&Vec<f64>> = vec![&self.rho, &self.pressure, &self.energy];
        all.extend(self.m.iter());
        all.extend(self.u.iter().flatten());
        all.extend(self.flux.iter());
        all.iter().flat_map(|v| v.iter()).fold(0.0f64, |a, x| a.max(x.abs()))
    }
}

fn check_metadata(slices: &[Slice], family: &TestFunctionFamily) -> Result<f64> {
    let first = slices.first().ok_or_else(|| invalid("no slices to verify"))?;
    if slices.len() < 2 {
        return Err(invalid("verification needs at least two slices"));
    }
    let grid = first.grid();
    if first.time != 0.0 {
        return Err(Error::GridMismatch(format!("first slice is at t = {}, not 0", first.time)));
    }
    for (j, s) in slices.iter().enumerate() {
        if s.grid() != grid || s.m.grid != grid || s.u.grid != grid || s.q.grid != grid {
            return Err(Error::GridMismatch(format!("slice {j} is on a different grid")));
        }
        if j > 0 && !(s.time > slices[j - 1].time) {
            return Err(Error::GridMismatch(format!("slice times are not increasing at {j}")));
        }
    }
    let t_end = slices[slices.len() - 1].time;
    if (family.t_end - t_end).abs() > 1e-12 * t_end || (family.length - grid.length).abs() > 1e-12 * grid.length {
        return Err(Error::GridMismatch("test family box does not match the slices".into()));
    }
    Ok(grid.length * grid.length * t_end)
}

/// Quadrature weights `(int theta l_k, int theta' l_k)` for each slice, with `l_k`
/// the piecewise-cubic Lagrange interpolation basis in time.
fn time_weights(times: &[f64], f: &TestFunction, refine: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(refine);
    let n = times.len();
    let width = n.min(4);
    let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
    for j in 0..n - 1 {
        let lo = j.saturating_sub(1).min(n - width);
        let (t0, t1) = (times[j], times[j + 1]);
        let half = 0.5 * (t1 - t0);
        for (xi, wi) in x.iter().zip(&w) {
            let t = t0 + half * (1.0 + xi);
            let [th, dth] = f.temporal(t);
            for k in lo..lo + width {
                let mut l = 1.0;
                for i in lo..lo + width {
                    if i != k {
                        l *= (t - times[i]) / (times[k] - times[i]);
                    }
                }
                a[k] += wi * half * th * l;
                b[k] += wi * half * dth * l;
            }
        }
    }
    (a, b)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn evaluate(slices: &[Slice], data: &[Integrands], f: &TestFunction, beta: f64, refine: usize) -> Raw {
    let grid = slices[0].grid();
    let area = grid.spacing() * grid.spacing();
    let mut s = Vec::with_capacity(grid.nodes());
    let mut ds = [Vec::with_capacity(grid.nodes()), Vec::with_capacity(grid.nodes())];
    for k in 0..grid.nodes() {
        let (v, g) = f.spatial(grid.point(k));
        s.push(v);
        ds[0].push(g[0]);
        ds[1].push(g[1]);
    }
    let times: Vec<f64> = slices.iter().map(|s| s.time).collect();
    let (wt, wdt) = time_weights(&times, f, refine);
    let theta0 = f.temporal(0.0)[0];

    let mut raw = Raw::default();
    for (k, d) in data.iter().enumerate() {
        let (a, b) = (wt[k] * area, wdt[k] * area);
        raw.continuity += b * dot(&d.rho, &s) + a * (dot(&d.m[0], &ds[0]) + dot(&d.m[1], &ds[1]));
        for i in 0..2 {
            let stress = dot(&d.u[i][0], &ds[0]) + dot(&d.u[i][1], &ds[1]) + dot(&d.pressure, &ds[i]);
            let work = a * dot(&d.bm[i], &s);
            raw.momentum[i] += b * dot(&d.m[i], &s) + a * stress + work;
            raw.source_work[i] += work;
        }
        raw.energy += b * dot(&d.energy, &s) + a * (dot(&d.flux[0], &ds[0]) + dot(&d.flux[1], &ds[1]))
            - a * 2.0 * beta * dot(&d.q, &s);
    }
    let d0 = &data[0];
    let c = theta0 * area;
    raw.continuity += c * dot(&d0.rho, &s);
    raw.momentum[0] += c * dot(&d0.m[0], &s);
    raw.momentum[1] += c * dot(&d0.m[1], &s);
    raw.energy += c * dot(&d0.energy, &s);
    raw
}

struct Evaluation {
    coarse: Vec<Raw>,
    fine: Vec<Raw>,
    scale: f64,
    measure: f64,
}

fn evaluate_family(
    slices: &[Slice],
    plaw: &PressureLaw,
    source: &SourceMatrix,
    family: &TestFunctionFamily,
    refine: usize,
) -> Result<Evaluation> {
    let measure = check_metadata(slices, family)?;
    let data: Vec<Integrands> = slices.par_iter().map(|s| Integrands::new(s, plaw, source)).collect();
    let scale = data.iter().map(Integrands::sup).fold(0.0, f64::max);
    let beta = source.beta();
    let run = |r: usize| -> Vec<Raw> { family.members.par_iter().map(|f| evaluate(slices, &data, f, beta, r)).collect() };
    Ok(Evaluation { coarse: run(refine), fine: run(2 * refine), scale, measure })
}

fn resolved(coarse: f64, fine: f64, ratio: f64, floor: f64) -> bool {
    let change = (coarse - fine).abs();
    change <= ratio * fine.abs() || change <= ratio * floor
}

/// Field scale `sup |(rho, m, U, p + q, E, (E + p) m / rho)|` used by the tolerances.
pub fn field_scale(slices: &[Slice], plaw: &PressureLaw, source: &SourceMatrix) -> f64 {
    slices.iter().map(|s| Integrands::new(s, plaw, source).sup()).fold(0.0, f64::max)
}

/// The continuity and momentum functionals of the weak formulation,
/// tested against every member of `family`.
///
/// The momentum flux is the relaxed `U + (p(rho) + q) I`, which equals
/// `m (x) m / rho + p(rho) I` wherever the state lies on the constraint set.
/// The `t = 0` slice provides the Cauchy data `(rho_0, m_0)`.
pub fn weak_residual(
    slices: &[Slice],
    plaw: &PressureLaw,
    source: &SourceMatrix,
    family: &TestFunctionFamily,
    cfg: &VerifyConfig,
) -> Result<Vec<WeakResidual>> {
    let ev = evaluate_family(slices, plaw, source, family, cfg.refine)?;
    Ok(family
        .members
        .iter()
        .zip(ev.coarse.iter().zip(&ev.fine))
        .map(|(f, (c, r))| {
            let norm = f.c2_norm();
            let tolerance = cfg.tolerance * ev.scale * norm * ev.measure;
            let mom = r.momentum[0].hypot(r.momentum[1]);
            let ok = |a: f64, b: f64| resolved(a, b, cfg.resolution_ratio, tolerance);
            WeakResidual {
                test: f.label(),
                continuity: r.continuity,
                momentum: r.momentum,
                source_work: r.source_work,
                norm,
                tolerance,
                normalized: [r.continuity.abs() / (norm * ev.measure), mom / (norm * ev.measure)],
                resolved: ok(c.continuity, r.continuity) && ok(c.momentum[0], r.momentum[0]) && ok(c.momentum[1], r.momentum[1]),
                pass: r.continuity.abs() <= tolerance && mom <= tolerance,
            }
        })
        .collect())
}

/// `int int (E d_t phi + (E + p) m / rho . grad phi - n beta q phi) + int E_0 phi(., 0)`
/// for each nonnegative member of `family`, with `E = I(rho) + q`.
///
/// `-n beta q` bounds the source work `m . B m / rho` from below on the
/// constraint set, so a value `>= -tolerance` certifies the energy inequality.
pub fn admissibility_residual(
    slices: &[Slice],
    plaw: &PressureLaw,
    source: &SourceMatrix,
    family: &TestFunctionFamily,
    cfg: &VerifyConfig,
) -> Result<Vec<AdmissibilityValue>> {
    if !family.nonnegative {
        return Err(invalid("admissibility needs a nonnegative test family"));
    }
    let ev = evaluate_family(slices, plaw, source, family, cfg.refine)?;
    Ok(family
        .members
        .iter()
        .zip(ev.coarse.iter().zip(&ev.fine))
        .map(|(f, (c, r))| {
            let norm = f.c2_norm();
            let tolerance = cfg.tolerance * ev.scale * norm * ev.measure;
            AdmissibilityValue {
                test: f.label(),
                value: r.energy,
                norm,
                tolerance,
                normalized: r.energy / (norm * ev.measure),
                resolved: resolved(c.energy, r.energy, cfg.resolution_ratio, tolerance),
                pass: r.energy >= -tolerance,
            }
        })
        .collect())
}
