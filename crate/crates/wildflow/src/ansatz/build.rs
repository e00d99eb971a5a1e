use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chi::{solve_chi, ChiMode, ChiParams};
use super::density::RegionDensity;
use super::pressure::{PressureLaw, SourceMatrix};
use super::state::{
    AnsatzKind, BuildDiagnostics, ConstraintSet, RegionConstraint, Slice, StrictRegion, SubsolutionState, TimeGrid,
};
use crate::error::{invalid, Error, Result};
use crate::geometry::{select_extreme_points, ConstraintParams, StatePoint};
use crate::operators::{
    neumann_poisson_cube, poisson_solve, r_padded, r_torus, CubeGrid, DeviatorField, ScalarField, TorusGrid,
    VectorField,
};
use crate::profiles::TimeCutoff;

/// Relative variation allowed per time step for the analytic parts `h`, `chi`.
const STEP_VARIATION: f64 = 0.01;

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn min(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Smallest multiple of 4 slices keeping `rate * dt <= STEP_VARIATION`.
fn slice_count(t_end: f64, rate: f64) -> usize {
    let raw = (t_end * rate / STEP_VARIATION).ceil().max(4.0) as usize;
    raw.div_ceil(4) * 4
}

fn scale_of(slices: &[Slice]) -> f64 {
    slices.iter().fold(0.0, |acc, s| {
        acc.max(s.rho.sup_norm()).max(s.m.sup_norm()).max(s.u.sup_norm()).max(s.q.sup_norm())
    })
}

fn deviator_combination(a: f64, f: &DeviatorField, b: f64, g: &DeviatorField) -> DeviatorField {
    let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| a * u + b * v).collect();
    DeviatorField { grid: f.grid, r11: mix(&f.r11, &g.r11), r12: mix(&f.r12, &g.r12) }
}

fn scaled(v: &VectorField, s: f64) -> VectorField {
    VectorField { grid: v.grid, components: v.components.clone().map(|c| c.into_iter().map(|x| s * x).collect()) }
}

fn apply_source(source: &SourceMatrix, v: &VectorField) -> VectorField {
    let mut out = VectorField::zeros(v.grid);
    for k in 0..v.grid.nodes() {
        let b = source.apply([v.components[0][k], v.components[1][k]]);
        out.components[0][k] = b[0];
        out.components[1][k] = b[1];
    }
    out
}

/// `sup |drho + div m|` and `sup |dm + div U + grad(p + q) - B m|` on one slice,
/// with the time derivatives supplied analytically.
pub fn slice_residuals(
    s: &Slice,
    drho: &[f64],
    dm: &VectorField,
    plaw: &PressureLaw,
    source: &SourceMatrix,
) -> (f64, f64) {
    let div_m = s.m.divergence();
    let continuity = drho.iter().zip(&div_m.values).fold(0.0f64, |a, (d, v)| a.max((d + v).abs()));
    let grid = s.grid();
    let total = ScalarField {
        grid,
        values: s.rho.values.iter().zip(&s.q.values).map(|(&r, &q)| plaw.p(r) + q).collect(),
    };
    let grad = total.gradient();
    let div_u = s.u.divergence();
    let bm = apply_source(source, &s.m);
    let mut momentum: f64 = 0.0;
    for c in 0..2 {
        for k in 0..grid.nodes() {
            let r = dm.components[c][k] + div_u.components[c][k] + grad.components[c][k] - bm.components[c][k];
            momentum = momentum.max(r.abs());
        }
    }
    (continuity, momentum)
}

fn zero_state_decomposition(rho: f64, q: f64, seed: u64) -> Result<ConstraintSet> {
    let params = ConstraintParams::new(rho, q)?;
    Ok(ConstraintSet::Finite { decomposition: select_extreme_points(&StatePoint::zero(2), &params, seed)? })
}

/// Stationary state `(rho_i, 0, 0, chi - p(rho_i))` on the labelled regions.
pub fn build_piecewise_constant(
    grid: TorusGrid,
    time: TimeGrid,
    density: &RegionDensity,
    chi: f64,
    plaw: PressureLaw,
    source: SourceMatrix,
    seed: u64,
) -> Result<SubsolutionState> {
    density.validate(&grid)?;
    if !density.is_piecewise_constant() {
        return Err(invalid("piecewise-constant ansatz needs zero slopes"));
    }
    let values = density.region_values();
    let p_max = values.iter().map(|&r| plaw.p(r)).fold(0.0, f64::max);
    if chi < p_max {
        return Err(Error::ChiInfeasible { time: 0.0, chi, floor: p_max });
    }
    let mut constraints = Vec::with_capacity(values.len());
    let mut active = Vec::new();
    for (label, &rho) in values.iter().enumerate() {
        let q_raw = chi - plaw.p(rho);
        let inert = q_raw <= 1e-12 * chi.max(1.0);
        let q = if inert { 0.0 } else { q_raw };
        let set = if inert { ConstraintSet::Inert } else { zero_state_decomposition(rho, q, seed.wrapping_add(label as u64))? };
        if !inert {
            active.push(label as u32);
        }
        constraints.push(RegionConstraint { label: label as u32, rho, q, set });
    }
    let regions = density.labels(&grid);
    let rho = ScalarField { grid, values: regions.iter().map(|&l| values[l as usize]).collect() };
    let q = ScalarField { grid, values: regions.iter().map(|&l| constraints[l as usize].q).collect() };
    let slices: Vec<Slice> = time
        .times()
        .into_iter()
        .map(|t| Slice {
            time: t,
            rho: rho.clone(),
            m: VectorField::zeros(grid),
            u: DeviatorField { grid, r11: vec![0.0; grid.nodes()], r12: vec![0.0; grid.nodes()] },
            q: q.clone(),
        })
        .collect();
    let zero = vec![0.0; grid.nodes()];
    let (continuity_residual, momentum_residual) =
        slice_residuals(&slices[0], &zero, &VectorField::zeros(grid), &plaw, &source);
    let mut state = SubsolutionState {
        kind: AnsatzKind::PiecewiseConstant,
        grid,
        time,
        slices,
        regions,
        constraints,
        strict: StrictRegion { labels: active, t_start: 0.0, t_end: time.t_end },
        pressure: plaw,
        source,
        chi: None,
        psi: None,
        rho_sharp: None,
        diagnostics: BuildDiagnostics::default(),
    };
    state.diagnostics = BuildDiagnostics {
        continuity_residual,
        momentum_residual,
        min_margin: if state.strict.labels.is_empty() { 0.0 } else { state.strict_margin()? },
        scale: scale_of(&state.slices),
        ..BuildDiagnostics::default()
    };
    Ok(state)
}

/// Inputs of the small-perturbation ansatz beyond the density itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbedOptions {
    /// Largest admissible `max(sup |rho0 - mean|, sup |grad rho0|)`.
    pub eps_budget: f64,
    pub c0: f64,
    pub chi0: f64,
    pub floor_constant: f64,
    /// RK4 step for `chi`.
    pub step: f64,
    pub t_end: f64,
    /// Number of slices; chosen from the variation of `h` and `chi` when absent.
    pub slices: Option<usize>,
    /// Test hook: adds `slope_offset * t` to `chi`.
    pub slope_offset: f64,
}

impl Default for PerturbedOptions {
    fn default() -> Self {
        Self {
            eps_budget: 1e-2,
            c0: 10.0,
            chi0: 0.1,
            floor_constant: 0.25,
            step: 1e-3,
            t_end: 1.25,
            slices: None,
            slope_offset: 0.0,
        }
    }
}

/// Relaxes a nearly constant density to its mean on `t in [0, 1)` through the
/// acoustic potential `lap Psi = rho_sharp - rho0`.
pub fn build_perturbed_density(
    rho0: &ScalarField,
    plaw: PressureLaw,
    source: SourceMatrix,
    opts: &PerturbedOptions,
) -> Result<SubsolutionState> {
    let grid = rho0.grid;
    let low = min(&rho0.values);
    if !(low > 0.0) {
        return Err(Error::DensityBounds { rho: low, lower: 0.0, upper: f64::INFINITY });
    }
    let rho_sharp = rho0.mean();
    let deviation = rho0.values.iter().fold(0.0f64, |a, v| a.max((v - rho_sharp).abs()));
    let grad0 = rho0.gradient();
    let slope = (0..grid.nodes())
        .map(|k| grad0.components[0][k].hypot(grad0.components[1][k]))
        .fold(0.0, f64::max);
    for (which, value) in [("sup |rho0 - mean|", deviation), ("sup |grad rho0|", slope)] {
        if value > opts.eps_budget {
            return Err(Error::Smallness { which, value, budget: opts.eps_budget });
        }
    }
    let eps = deviation.max(slope);
    let beta = source.beta();
    let chi = solve_chi(ChiParams {
        mode: ChiMode::GeneralSource { beta, eps, c0: opts.c0, floor_constant: opts.floor_constant },
        chi0: opts.chi0,
        horizon: 1.0,
        step: opts.step,
    })?
    .with_slope_offset(opts.slope_offset);

    let rhs = ScalarField { grid, values: rho0.values.iter().map(|v| rho_sharp - v).collect() };
    let psi = poisson_solve(&rhs, false).psi;
    let g = psi.gradient();
    let bg = apply_source(&source, &g);
    let (r_g, _) = r_torus(&g);
    let (r_bg, _) = r_torus(&bg);

    let h = TimeCutoff::new();
    let slices_n = match opts.slices {
        Some(n) if n > 0 => n,
        Some(_) => return Err(invalid("slice count must be positive")),
        None => {
            let rate = 2.0f64.max(h.sup_derivatives()[1]).max(chi.max_relative_change(1.0));
            slice_count(opts.t_end, rate)
        }
    };
    let time = TimeGrid { t_end: opts.t_end, slices: slices_n };
    let p_sharp = plaw.p(rho_sharp);
    let mut slices = Vec::with_capacity(slices_n + 1);
    let mut diag = BuildDiagnostics { smallness: Some([deviation, slope]), ..BuildDiagnostics::default() };
    for t in time.times() {
        let [hv, h1, h2] = h.eval(t);
        let (chi_t, _) = chi.eval(t);
        let rho = ScalarField {
            grid,
            values: rho0.values.iter().map(|&r0| (1.0 - hv) * rho_sharp + hv * r0).collect(),
        };
        let q = ScalarField { grid, values: rho.values.iter().map(|&r| p_sharp - plaw.p(r) + chi_t).collect() };
        let m = scaled(&g, h1);
        let u = deviator_combination(-h2, &r_g, h1, &r_bg);
        let slice = Slice { time: t, rho, m, u, q };
        let drho: Vec<f64> = rho0.values.iter().map(|r0| h1 * (r0 - rho_sharp)).collect();
        let dm = scaled(&g, h2);
        let (c, mo) = slice_residuals(&slice, &drho, &dm, &plaw, &source);
        diag.continuity_residual = diag.continuity_residual.max(c);
        diag.momentum_residual = diag.momentum_residual.max(mo);
        slices.push(slice);
    }
    let kappa = beta.exp() * deviation.max(2.0 * g.sup_norm());
    diag.kappa = Some(kappa);
    diag.scale = scale_of(&slices);
    let mut state = SubsolutionState {
        kind: AnsatzKind::PerturbedDensity,
        grid,
        time,
        slices,
        regions: vec![0; grid.nodes()],
        constraints: vec![RegionConstraint { label: 0, rho: rho_sharp, q: chi.eval(opts.t_end).0, set: ConstraintSet::Full }],
        strict: StrictRegion { labels: vec![0], t_start: 0.0, t_end: opts.t_end },
        pressure: plaw,
        source,
        chi: Some(chi),
        psi: Some(psi),
        rho_sharp: Some(ScalarField { grid, values: vec![rho_sharp; grid.nodes()] }),
        diagnostics: BuildDiagnostics::default(),
    };
    diag.min_margin = state.strict_margin()?;
    state.diagnostics = diag;
    Ok(state)
}

/// One slice of the decay check `sup max(|rho - rho_sharp|, |m|) <= kappa e^{-beta t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub time: f64,
    pub deviation: f64,
    pub bound: f64,
}

pub fn decay_profile(state: &SubsolutionState) -> Result<Vec<DecaySample>> {
    let (Some(sharp), Some(kappa)) = (&state.rho_sharp, state.diagnostics.kappa) else {
        return Err(invalid("decay profile needs a relaxing ansatz"));
    };
    let beta = state.source.beta();
    Ok(state
        .slices
        .iter()
        .map(|s| {
            let d = s.rho.values.iter().zip(&sharp.values).fold(0.0f64, |a, (r, r0)| a.max((r - r0).abs()));
            DecaySample { time: s.time, deviation: d.max(s.m.sup_norm()), bound: kappa * (-beta * s.time).exp() }
        })
        .collect())
}

/// A dyadic square of the torus grid, `cells` cells wide, owning the nodes
/// `origin + [0, cells)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhitneyCube {
    pub origin: [usize; 2],
    pub cells: usize,
    pub label: u32,
}

/// Dyadic covering by squares of uniform label with `side * varrho <= theta`.
pub fn dyadic_cover(
    density: &RegionDensity,
    grid: &TorusGrid,
    theta: f64,
    min_cells: usize,
) -> Result<Vec<WhitneyCube>> {
    let n = grid.resolution;
    let labels = density.labels(grid);
    let varrho = density.max_slope();
    let mut out = Vec::new();
    let mut stack = vec![([0usize, 0usize], n)];
    while let Some((o, cells)) = stack.pop() {
        let first = labels[o[0] * n + o[1]];
        let uniform = (0..cells).all(|a| (0..cells).all(|b| labels[(o[0] + a) * n + o[1] + b] == first));
        let side = cells as f64 * grid.spacing();
        if uniform && side * varrho <= theta {
            out.push(WhitneyCube { origin: o, cells, label: first });
            continue;
        }
        let half = cells / 2;
        if half < min_cells {
            return Err(Error::Covering(format!(
                "cube at nodes {o:?} with {cells} cells: uniform label {uniform}, side * slope = {:.3e} > {theta:.3e}",
                side * varrho
            )));
        }
        for (a, b) in [(1, 1), (1, 0), (0, 1), (0, 0)] {
            stack.push(([o[0] + a * half, o[1] + b * half], half));
        }
    }
    out.sort_by_key(|c| (c.origin, c.cells));
    Ok(out)
}

/// Inputs of the piecewise-Lipschitz ansatz beyond the density itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LipschitzOptions {
    /// Transition time `T`.
    pub transition: f64,
    /// Bound on `side * varrho` for every cube.
    pub theta: f64,
    /// Constants `C0..C3` of the `chi` equation.
    pub c: [f64; 4],
    pub chi0: f64,
    pub floor_constant: f64,
    pub step: f64,
    pub t_end: f64,
    pub slices: Option<usize>,
    /// Padding factor of the whole-plane surrogate.
    pub pad: usize,
    /// Smallest cube width in grid cells.
    pub min_cells: usize,
}

impl Default for LipschitzOptions {
    fn default() -> Self {
        Self {
            transition: 0.5,
            theta: 0.05,
            c: [0.1; 4],
            chi0: 4.0,
            floor_constant: 1.0,
            step: 1e-3,
            t_end: 0.75,
            slices: None,
            pad: 4,
            min_cells: 4,
        }
    }
}

struct CubeSolve {
    rho_sharp: f64,
    gradient: [Vec<f64>; 2],
    samples: Vec<f64>,
    residual: f64,
    face: f64,
}

/// Relaxes a piecewise-affine density to its cube means on `[0, T)` with
/// per-cube Neumann potentials; afterwards the state is piecewise constant.
pub fn build_piecewise_lipschitz(
    density: &RegionDensity,
    grid: TorusGrid,
    plaw: PressureLaw,
    source: SourceMatrix,
    opts: &LipschitzOptions,
    seed: u64,
) -> Result<SubsolutionState> {
    density.validate(&grid)?;
    if !source.is_antisymmetric(1e-14) {
        return Err(invalid("piecewise-Lipschitz ansatz needs an antisymmetric source matrix"));
    }
    if !(opts.transition > 0.0) || opts.t_end < opts.transition {
        return Err(invalid("need 0 < transition <= t_end"));
    }
    let cubes = dyadic_cover(density, &grid, opts.theta, opts.min_cells)?;
    let h = grid.spacing();
    let solves: Vec<CubeSolve> = cubes
        .par_iter()
        .map(|c| {
            let cg = CubeGrid::new([c.origin[0] as f64 * h, c.origin[1] as f64 * h], c.cells as f64 * h, c.cells)?;
            let samples = cg.sample(|x| density.eval_region(c.label, x, grid.length));
            let f: Vec<f64> = samples.iter().map(|v| -v).collect();
            let sol = neumann_poisson_cube(&f, &cg)?;
            Ok(CubeSolve {
                rho_sharp: -sol.removed_mean,
                residual: sol.residual,
                face: sol.face_derivative,
                gradient: sol.gradient,
                samples,
            })
        })
        .collect::<Result<_>>()?;

    let n = grid.resolution;
    let mut regions = vec![0u32; grid.nodes()];
    let mut rho0 = vec![0.0; grid.nodes()];
    let mut sharp = vec![0.0; grid.nodes()];
    let mut g = VectorField::zeros(grid);
    for (i, (c, s)) in cubes.iter().zip(&solves).enumerate() {
        let p = c.cells + 1;
        for a in 0..c.cells {
            for b in 0..c.cells {
                let node = (c.origin[0] + a) * n + c.origin[1] + b;
                let local = a * p + b;
                regions[node] = i as u32;
                rho0[node] = s.samples[local];
                sharp[node] = s.rho_sharp;
                g.components[0][node] = s.gradient[0][local];
                g.components[1][node] = s.gradient[1][local];
            }
        }
    }
    let p_hat = solves.iter().flat_map(|s| s.samples.iter()).map(|&r| plaw.p(r)).fold(0.0, f64::max);
    let varrho = density.max_slope();
    let chi = solve_chi(ChiParams {
        mode: ChiMode::Lipschitz { c: opts.c, varrho, p_hat, theta: opts.theta, floor_constant: opts.floor_constant },
        chi0: opts.chi0,
        horizon: opts.transition,
        step: opts.step,
    })?;
    let chi_t = chi.eval(opts.transition).0;

    let bg = apply_source(&source, &g);
    let (r_g, rep_g) = r_padded(&g, opts.pad)?;
    let (r_bg, rep_bg) = r_padded(&bg, opts.pad)?;

    let constraints: Vec<RegionConstraint> = cubes
        .par_iter()
        .zip(&solves)
        .enumerate()
        .map(|(i, (_, s))| {
            let q = chi_t - plaw.p(s.rho_sharp);
            let set = zero_state_decomposition(s.rho_sharp, q, seed.wrapping_add(i as u64))?;
            Ok(RegionConstraint { label: i as u32, rho: s.rho_sharp, q, set })
        })
        .collect::<Result<_>>()?;

    let cutoff = TimeCutoff::new();
    let slices_n = match opts.slices {
        Some(n) if n > 0 => n,
        Some(_) => return Err(invalid("slice count must be positive")),
        None => {
            let rate = (cutoff.sup_derivatives()[1] / opts.transition).max(chi.max_relative_change(1.0));
            slice_count(opts.t_end, rate)
        }
    };
    let time = TimeGrid { t_end: opts.t_end, slices: slices_n };
    let mut slices = Vec::with_capacity(slices_n + 1);
    let mut coeff_sup = [0.0f64; 2];
    let mut h1_sup: f64 = 0.0;
    for t in time.times() {
        let [hv, h1, h2] = cutoff.eval_scaled(t, opts.transition);
        coeff_sup = [coeff_sup[0].max(h2.abs()), coeff_sup[1].max(h1.abs())];
        h1_sup = h1_sup.max(h1.abs());
        let (c, _) = chi.eval(t);
        let rho = ScalarField { grid, values: rho0.iter().zip(&sharp).map(|(&r0, &rs)| (1.0 - hv) * rs + hv * r0).collect() };
        let q = ScalarField { grid, values: rho.values.iter().map(|&r| c - plaw.p(r)).collect() };
        let m = scaled(&g, h1);
        let u = deviator_combination(-h2, &r_g, h1, &r_bg);
        slices.push(Slice { time: t, rho, m, u, q });
    }
    let mut diag = BuildDiagnostics {
        continuity_residual: h1_sup * solves.iter().map(|s| s.residual).fold(0.0, f64::max),
        momentum_residual: coeff_sup[0] * rep_g.residual + coeff_sup[1] * rep_bg.residual,
        smallness: Some([sup(&rho0.iter().zip(&sharp).map(|(a, b)| a - b).collect::<Vec<_>>()), varrho]),
        mean_residual: Some(rep_g.residual.max(rep_bg.residual)),
        face_flux: Some(solves.iter().map(|s| s.face).fold(0.0, f64::max)),
        scale: scale_of(&slices),
        notes: vec![format!("{} cubes, p_hat = {p_hat:.6e}, chi(T) = {chi_t:.6e}", cubes.len())],
        ..BuildDiagnostics::default()
    };
    let labels = (0..cubes.len() as u32).collect();
    let mut state = SubsolutionState {
        kind: AnsatzKind::PiecewiseLipschitz,
        grid,
        time,
        slices,
        regions,
        constraints,
        strict: StrictRegion { labels, t_start: 0.0, t_end: opts.t_end },
        pressure: plaw,
        source,
        chi: Some(chi),
        psi: None,
        rho_sharp: Some(ScalarField { grid, values: sharp }),
        diagnostics: BuildDiagnostics::default(),
    };
    diag.min_margin = state.strict_margin()?;
    state.diagnostics = diag;
    Ok(state)
}
