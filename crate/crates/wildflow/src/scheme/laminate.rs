use std::time::Instant;

use nalgebra::{Matrix5, Vector5};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cache::{KernelKey, WaveCache};
use super::config::IterationConfig;
use super::region::SpaceTimeRegion;
use super::report::{weighted_sum, StageReport};
use crate::ansatz::{ConstraintSet, Slice, SubsolutionState};
use crate::error::{invalid, Error, Result};
use crate::geometry::{
    dist_to_k_planar, plan_wave_step_with_weights, select_extreme_points, ConstraintParams, SimplexDecomposition,
    StatePoint,
};
use crate::operators::{ScalarField, VectorField};

/// Hash of a seed and a tuple of counters, used to key every random draw.
pub(crate) fn mix(seed: u64, parts: &[u64]) -> u64 {
    let mut h = seed ^ 0x243f_6a88_85a3_08d3;
    for &p in parts {
        h = h.wrapping_add(p).wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

/// Unit-frame simplex of `K_{1,1/2}` with its inverse vertex matrix.
struct UnitSimplex {
    decomp: SimplexDecomposition,
    inverse: Matrix5<f64>,
    sensitivity: f64,
}

impl UnitSimplex {
    fn new(decomp: SimplexDecomposition) -> Result<Self> {
        if decomp.vertices.len() != 5 {
            return Err(invalid("the stage loop runs in two space dimensions"));
        }
        let a = Matrix5::from_fn(|r, c| if r < 4 { decomp.vertices[c].coords()[r] } else { 1.0 });
        let inverse = a.try_inverse().ok_or_else(|| invalid("unit simplex vertices are affinely dependent"))?;
        let sensitivity = decomp.barycentric_sensitivity();
        Ok(Self { decomp, inverse, sensitivity })
    }

    fn weights(&self, c: &[f64; 4]) -> [f64; 5] {
        let v = self.inverse * Vector5::new(c[0], c[1], c[2], c[3], 1.0);
        [v[0], v[1], v[2], v[3], v[4]]
    }
}

fn unit_params() -> ConstraintParams {
    ConstraintParams { rho: 1.0, q: 0.5 }
}

fn to_unit(d: &SimplexDecomposition) -> SimplexDecomposition {
    SimplexDecomposition {
        params: unit_params(),
        target: d.target.to_unit(&d.params),
        vertices: d.vertices.iter().map(|v| v.to_unit(&d.params)).collect(),
        directions: d.directions.clone(),
        weights: d.weights.clone(),
        slack: d.slack,
    }
}

/// One Monte Carlo chain: a random point of a grid cell of `D` and the unit
/// frame state the successive waves have driven it to.
#[derive(Debug, Clone)]
struct Sample {
    slice: u32,
    node: u32,
    simplex: u32,
    weight: f64,
    offset: [f64; 2],
    time: f64,
    rho: f64,
    q: f64,
    w: [f64; 4],
}

impl Sample {
    fn scales(&self) -> (f64, f64) {
        ((2.0 * self.rho * self.q).sqrt(), 2.0 * self.q)
    }

    fn physical(&self) -> [f64; 4] {
        let (sm, su) = self.scales();
        [self.w[0] * sm, self.w[1] * sm, self.w[2] * su, self.w[3] * su]
    }

    fn dist(&self) -> f64 {
        dist_to_k_planar(&self.physical(), self.rho, self.q)
    }

    fn saturation(&self) -> f64 {
        let p = self.physical();
        (p[0] * p[0] + p[1] * p[1] - 2.0 * self.rho * self.q).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Moved(u32),
    Rejected,
    Idle,
    Uncovered,
}

/// Which part of `D` a stage covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pass {
    /// A compact exhaustion of `D`, away from every boundary.
    Generic,
    /// Additionally covers the `t = 0` layer up to the stage's temporal half-width.
    Initial,
}

/// A strict subsolution together with the laminate built on top of it.
///
/// Every grid cell of `D` carries `chains` independent samples. A stage
/// applies a few wave levels to each of them: at a level, a sample's state is
/// split along an edge of its simplex and replaced by the value of the
/// localized plane wave at a uniformly random point of its cube, the cubes of
/// successive levels being infinitely finer than the previous ones. Cell
/// averages of the atoms vanish exactly, so the coarse-grained state stays
/// the base state and only the distribution of values inside cells evolves.
pub struct StagedState {
    pub base: SubsolutionState,
    pub region: SpaceTimeRegion,
    pub chains: usize,
    pub seed: u64,
    pub stage: usize,
    simplices: Vec<UnitSimplex>,
    samples: Vec<Sample>,
    dist: Vec<f64>,
    cache: WaveCache,
    /// Bound `C0` of the distance to `K` over `D`.
    c0: f64,
    lipschitz: (f64, usize),
    slice_ranges: Vec<(usize, usize)>,
}

impl StagedState {
    pub fn new(base: SubsolutionState, cfg: &IterationConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let region = SpaceTimeRegion::strict(&base)?;
        base.strict_margin()?;

        let chains = cfg.quad_refine;
        let h = base.grid.spacing();
        let cells: Vec<Cell> = (0..region.slices())
            .filter_map(|j| region.time_cell(j).map(|c| (j, c)))
            .flat_map(|(j, (lo, hi))| region.mask.iter().enumerate().filter(|(_, &m)| m).map(move |(node, _)| (j, node, lo, hi)))
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(j, node, lo, hi)| {
                let slice = &base.slices[j];
                let (rho, q) = slice.params_at(node);
                let unit = slice.state_at(node).to_unit(&ConstraintParams::new(rho, q)?);
                let w = [unit.coords()[0], unit.coords()[1], unit.coords()[2], unit.coords()[3]];
                Ok(Cell { slice: j, node, lo, hi, rho, q, w })
            })
            .collect::<Result<_>>()?;
        let (simplices, owner) = assign_simplices(&base, &cells, seed)?;

        let samples: Vec<Sample> = cells
            .iter()
            .zip(&owner)
            .flat_map(|(cell, &simplex)| {
                (0..chains).map(move |c| {
                    let key = mix(seed, &[1, cell.slice as u64, cell.node as u64, c as u64]);
                    let mut rng = ChaCha8Rng::seed_from_u64(key);
                    let offset = [h * (rng.gen::<f64>() - 0.5), h * (rng.gen::<f64>() - 0.5)];
                    let time = cell.lo + (cell.hi - cell.lo) * rng.gen::<f64>();
                    Sample {
                        slice: cell.slice as u32,
                        node: cell.node as u32,
                        simplex,
                        weight: h * h * (cell.hi - cell.lo) / chains as f64,
                        offset,
                        time,
                        rho: cell.rho,
                        q: cell.q,
                        w: cell.w,
                    }
                })
            })
            .collect();

        let mut slice_ranges = Vec::new();
        let mut start = 0;
        for i in 1..=samples.len() {
            if i == samples.len() || samples[i].slice != samples[start].slice {
                slice_ranges.push((start, i));
                start = i;
            }
        }
        let dist = samples.par_iter().map(Sample::dist).collect();
        let c0 = samples
            .iter()
            .map(|s| 2.0 * (2.0 * s.rho * s.q + 2.0 * s.q * s.q).sqrt())
            .fold(0.0, f64::max);
        let lipschitz = base_lipschitz(&base, &region);
        let cache = WaveCache::new(base.source.matrix, cfg.mu_bins, cfg.inner_fraction, cfg.source_bin, cfg.max_doublings)?;
        Ok(Self { base, region, chains, seed, stage: 0, simplices, samples, dist, cache, c0, lipschitz, slice_ranges })
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    fn weights(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.weight).collect()
    }

    /// `int_D dist(w, K)` and its standard error.
    pub fn dist_integral(&self) -> (f64, f64) {
        weighted_sum(&self.weights(), &self.dist, self.chains)
    }

    /// `|w|^2_{L2(D)}` and its standard error.
    pub fn l2_norm(&self) -> (f64, f64) {
        let sq: Vec<f64> = self.samples.iter().map(|s| s.physical().iter().map(|x| x * x).sum()).collect();
        weighted_sum(&self.weights(), &sq, self.chains)
    }

    /// `|w - other|^2_{L2(D)}` between two states built on the same base and
    /// chain count, with its standard error.
    pub fn l2_distance(&self, other: &Self) -> Result<(f64, f64)> {
        if self.samples.len() != other.samples.len() || self.chains != other.chains {
            return Err(invalid("states do not share a sample layout"));
        }
        let d: Vec<f64> = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| {
                let (pa, pb) = (a.physical(), b.physical());
                dot(&sub(&pa, &pb), &sub(&pa, &pb))
            })
            .collect();
        Ok(weighted_sum(&self.weights(), &d, self.chains))
    }

    /// Smallest barycentric weight over all samples.
    pub fn min_slack(&self) -> f64 {
        self.samples
            .par_iter()
            .map(|s| self.simplices[s.simplex as usize].weights(&s.w).into_iter().fold(f64::INFINITY, f64::min))
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Runs one stage with target `eps`; `stage` is incremented first.
    pub fn one_stage(&mut self, eps: f64, pass: Pass, cfg: &IterationConfig) -> Result<StageReport> {
        let clock = Instant::now();
        self.stage += 1;
        let k = self.stage;
        let eta = cfg.eta_at(k);
        let weights = self.weights();
        let before: Vec<[f64; 4]> = self.samples.iter().map(Sample::physical).collect();
        let (prev_dist, _) = self.dist_integral();

        let h = self.base.grid.spacing();
        let r0 = cfg.r0.unwrap_or(0.25 * self.base.grid.length);
        let mut side = r0 * 0.5f64.powi(k as i32);
        let (lip, lip_node) = self.lipschitz;
        if lip > 0.0 {
            side = side.min(eta / lip);
        }
        if side < cfg.min_side {
            return Err(Error::Covering(format!(
                "cube at node {lip_node} needs side {side:.3e} to keep the oscillation below {eta:.3e}, under the minimum {:.3e}",
                cfg.min_side
            )));
        }

        let deficit_budget = cfg.deficit_fraction * eps / self.c0.max(f64::MIN_POSITIVE);
        let initial = pass == Pass::Initial && self.region.t_start == 0.0;
        let mut boundary = self.region.boundary_measure();
        if initial {
            boundary -= self.region.area();
        }
        let layer = if boundary > 0.0 { deficit_budget / boundary } else { f64::INFINITY };
        let layer = layer.min(0.5 * h).min(0.25 * self.region.dt());
        let width = cfg.initial_width * 0.5f64.powi(k as i32);
        let region = &self.region;
        let covered: Vec<bool> = self
            .samples
            .iter()
            .map(|s| {
                let below = s.time - region.t_start;
                let above = if region.open_end { f64::INFINITY } else { region.t_end - s.time };
                let time_ok = (below >= layer || (initial && s.time <= width)) && above >= layer;
                time_ok && region.spatial_distance(s.node as usize, s.offset) >= layer
            })
            .collect();
        let deficit = boundary * layer;

        let mut hist = [0u64; 65];
        let (mut rejected, mut idle_last, mut active) = (0u64, 0u64, 0u64);
        let mut levels = 0;
        let source_zero = self.base.source.matrix.iter().flatten().all(|&b| b == 0.0);
        if prev_dist > 0.0 {
            for level in 0..cfg.max_levels {
                levels = level + 1;
                let Self { samples, simplices, cache, seed, .. } = self;
                let outcomes: Vec<Outcome> = samples
                    .par_iter_mut()
                    .zip(&covered)
                    .enumerate()
                    .map(|(idx, (s, &cov))| {
                        if !cov {
                            return Ok(Outcome::Uncovered);
                        }
                        let key = mix(*seed, &[2, idx as u64, k as u64, level as u64]);
                        wave_step(s, &simplices[s.simplex as usize], cache, k, eta, side, source_zero, key)
                    })
                    .collect::<Result<_>>()?;
                idle_last = 0;
                active = 0;
                for o in outcomes {
                    match o {
                        Outcome::Moved(m) => {
                            hist[m as usize] += 1;
                            active += 1;
                        }
                        Outcome::Rejected => {
                            rejected += 1;
                            active += 1;
                        }
                        Outcome::Idle => {
                            idle_last += 1;
                            active += 1;
                        }
                        Outcome::Uncovered => {}
                    }
                }
                if levels >= cfg.levels {
                    self.dist = self.samples.par_iter().map(Sample::dist).collect();
                    if self.dist_integral().0 <= eps {
                        break;
                    }
                }
            }
        }
        self.dist = self.samples.par_iter().map(Sample::dist).collect();

        let after: Vec<[f64; 4]> = self.samples.iter().map(Sample::physical).collect();
        let chains = self.chains;
        let (dist_integral, dist_se) = weighted_sum(&weights, &self.dist, chains);
        let sq: Vec<f64> = after.iter().map(|a| dot(a, a)).collect();
        let (l2_norm, _) = weighted_sum(&weights, &sq, chains);
        let inc: Vec<f64> = after.iter().zip(&before).map(|(a, b)| dot(a, a) - dot(b, b)).collect();
        let (l2_increment, l2_se) = weighted_sum(&weights, &inc, chains);
        let pair: Vec<f64> = after.iter().zip(&before).map(|(a, b)| dot(&sub(a, b), b)).collect();
        let (pairing, pairing_se) = weighted_sum(&weights, &pair, chains);
        let measure = self.region.measure();
        let pairing_bound = 0.5f64.powi(k as i32).min(prev_dist * prev_dist / (100.0 * measure));
        let (weak_star, weak_star_se) = self.weak_star(&before, &after, &cfg.test_modes);

        let count: u64 = hist.iter().sum();
        let quantile = |q: f64| -> f64 {
            if count == 0 {
                return 0.0;
            }
            let target = (q * (count - 1) as f64).round() as u64;
            let mut acc = 0;
            for (m, &c) in hist.iter().enumerate() {
                acc += c;
                if acc > target {
                    return 2f64.powi(m as i32);
                }
            }
            0.0
        };
        let cube_count = self
            .samples
            .iter()
            .zip(&covered)
            .filter(|(_, &c)| c)
            .map(|(s, _)| {
                let (sm, su) = s.scales();
                s.weight / (side * side * side * sm / su)
            })
            .sum::<f64>();

        Ok(StageReport {
            stage: k,
            pass: if initial { "initial" } else { "generic" }.into(),
            schedule_bound: eps,
            dist_integral,
            dist_d1: dist_integral,
            dist_se,
            quad_tolerance: 3.0 * dist_se,
            l2_norm,
            l2_increment,
            l2_tolerance: 3.0 * l2_se,
            pairing,
            pairing_bound,
            pairing_se,
            weak_star,
            weak_star_se,
            weak_star_budget: 0.5f64.powi(k as i32),
            cube_side: side,
            cube_count: cube_count.round(),
            boundary_layer: layer,
            deficit,
            deficit_budget,
            levels,
            rejected,
            idle_fraction: if active > 0 { idle_last as f64 / active as f64 } else { 0.0 },
            min_slack: self.min_slack(),
            lambda_min: quantile(0.0),
            lambda_median: quantile(0.5),
            lambda_max: quantile(1.0),
            kernels: self.cache.kernel_count(),
            saturation_median: (pass == Pass::Initial).then(|| self.initial_momentum().median),
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
        })
    }

    /// Largest `|int (after - before)(., t) psi dx|` over slices, trigonometric
    /// test functions and state components, with its standard error.
    fn weak_star(&self, before: &[[f64; 4]], after: &[[f64; 4]], modes: &[[i32; 2]]) -> (f64, f64) {
        let grid = self.base.grid;
        let base = 2.0 * std::f64::consts::PI / grid.length;
        let per_slice: Vec<(f64, f64)> = self
            .slice_ranges
            .par_iter()
            .map(|&(a, b)| {
                let (lo, hi) = self.region.time_cell(self.samples[a].slice as usize).unwrap();
                let weights: Vec<f64> = self.samples[a..b].iter().map(|s| s.weight / (hi - lo)).collect();
                let mut best = (0.0, 0.0);
                for mode in modes {
                    for parity in 0..2 {
                        let psi: Vec<f64> = self.samples[a..b]
                            .iter()
                            .map(|s| {
                                let x = grid.point(s.node as usize);
                                let arg = base * (mode[0] as f64 * x[0] + mode[1] as f64 * x[1]);
                                if parity == 0 {
                                    arg.cos()
                                } else {
                                    arg.sin()
                                }
                            })
                            .collect();
                        for c in 0..4 {
                            let vals: Vec<f64> = (a..b).map(|i| (after[i][c] - before[i][c]) * psi[i - a]).collect();
                            let (v, se) = weighted_sum(&weights, &vals, self.chains);
                            if v.abs() > best.0 {
                                best = (v.abs(), se);
                            }
                        }
                    }
                }
                best
            })
            .collect();
        per_slice.into_iter().fold((0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc })
    }

    /// Physical chain values of slice `j`, node by node, for nodes of `D`.
    fn chain_values(&self, chain: usize) -> impl Iterator<Item = (&Sample, [f64; 4])> {
        self.samples.iter().skip(chain).step_by(self.chains).map(|s| (s, s.physical()))
    }

    /// The base slices with the values of chain `chain` substituted inside `D`:
    /// one realization of the oscillating state.
    pub fn sample_slices(&self, chain: usize) -> Vec<Slice> {
        let mut slices = self.base.slices.clone();
        for (s, p) in self.chain_values(chain.min(self.chains - 1)) {
            let sl = &mut slices[s.slice as usize];
            let n = s.node as usize;
            let u = StatePoint::from_coords(2, &p).expect("planar state").u_matrix();
            sl.m.components[0][n] = p[0];
            sl.m.components[1][n] = p[1];
            sl.u.r11[n] = u[0][0];
            sl.u.r12[n] = u[0][1];
        }
        slices
    }

    /// Chain-averaged `dist(w, K)` per slice; base values outside `D`.
    pub fn dist_slices(&self) -> Vec<ScalarField> {
        let mut out: Vec<ScalarField> = self
            .base
            .slices
            .par_iter()
            .map(|sl| {
                let values = (0..sl.grid().nodes())
                    .map(|n| {
                        let (rho, q) = sl.params_at(n);
                        let c = sl.state_at(n);
                        let c = [c.coords()[0], c.coords()[1], c.coords()[2], c.coords()[3]];
                        if q > 0.0 {
                            dist_to_k_planar(&c, rho, q)
                        } else {
                            dot(&c, &c).sqrt()
                        }
                    })
                    .collect();
                ScalarField { grid: sl.grid(), values }
            })
            .collect();
        for (cell, d) in self.samples.chunks(self.chains).zip(self.dist.chunks(self.chains)) {
            out[cell[0].slice as usize].values[cell[0].node as usize] = d.iter().sum::<f64>() / d.len() as f64;
        }
        out
    }

    /// The `t = 0` momentum with its saturation diagnostic.
    pub fn initial_momentum(&self) -> InitialMomentum {
        let first = &self.base.slices[0];
        let grid = first.grid();
        let mut sample = first.m.clone();
        let mut saturation = ScalarField {
            grid,
            values: (0..grid.nodes())
                .map(|n| {
                    let (rho, q) = first.params_at(n);
                    let m = [first.m.components[0][n], first.m.components[1][n]];
                    (m[0] * m[0] + m[1] * m[1] - 2.0 * rho * q.max(0.0)).abs()
                })
                .collect(),
        };
        let mut nodal = Vec::new();
        for cell in self.samples.chunks(self.chains).filter(|c| c[0].slice == 0) {
            let n = cell[0].node as usize;
            let r = cell.iter().map(Sample::saturation).sum::<f64>() / cell.len() as f64;
            saturation.values[n] = r;
            nodal.push(r);
            let p = cell[0].physical();
            sample.components[0][n] = p[0];
            sample.components[1][n] = p[1];
        }
        nodal.sort_by(f64::total_cmp);
        let median = if nodal.is_empty() { f64::NAN } else { nodal[nodal.len() / 2] };
        InitialMomentum { coarse: first.m.clone(), sample, saturation, median }
    }

    /// Physical values, weights and simplex of every sample with region label `label`.
    pub(crate) fn labelled_values(&self, label: u32) -> Vec<([f64; 4], f64, f64)> {
        self.samples
            .iter()
            .filter(|s| self.base.regions[s.node as usize] == label)
            .map(|s| (s.physical(), s.rho, s.weight))
            .collect()
    }
}

/// The `t = 0` momentum of an initial-data run.
#[derive(Debug, Clone)]
pub struct InitialMomentum {
    /// Coarse-grained momentum, equal to the base state's.
    pub coarse: VectorField,
    /// One realization of the oscillating momentum.
    pub sample: VectorField,
    /// Nodal chain average of `| |m|^2 - n rho q |`.
    pub saturation: ScalarField,
    pub median: f64,
}

/// A grid cell of `D` with the unit-frame base state of its node.
struct Cell {
    slice: usize,
    node: usize,
    lo: f64,
    hi: f64,
    rho: f64,
    q: f64,
    w: [f64; 4],
}

/// Quantization step of unit states sharing a simplex on regions where the
/// whole constraint set is available.
const FULL_BIN: f64 = 0.02;

fn strictly_inside(simplex: &UnitSimplex, w: &[f64; 4]) -> bool {
    simplex.weights(w).iter().all(|&x| x > 0.0)
}

/// Simplex of every cell: the region's finite set, or for full regions a
/// simplex around the quantized unit state (around the state itself when the
/// quantized one does not contain it).
fn assign_simplices(base: &SubsolutionState, cells: &[Cell], seed: u64) -> Result<(Vec<UnitSimplex>, Vec<u32>)> {
    use std::collections::BTreeMap;
    let mut simplices = Vec::new();
    let mut finite = BTreeMap::new();
    let mut full_labels = Vec::new();
    for &label in &base.strict.labels {
        let c = base.constraint(label).ok_or_else(|| invalid(format!("no constraint for label {label}")))?;
        match &c.set {
            ConstraintSet::Finite { decomposition } => {
                simplices.push(UnitSimplex::new(to_unit(decomposition))?);
                finite.insert(label, simplices.len() as u32 - 1);
            }
            ConstraintSet::Full => full_labels.push(label),
            ConstraintSet::Inert => return Err(invalid(format!("label {label} is inert but marked strict"))),
        }
    }
    let bin = |w: &[f64; 4]| w.map(|x| (x / FULL_BIN).round() as i64);
    let mut bins: BTreeMap<[i64; 4], Vec<usize>> = BTreeMap::new();
    let mut owner = vec![u32::MAX; cells.len()];
    for (i, cell) in cells.iter().enumerate() {
        let label = base.regions[cell.node];
        match finite.get(&label) {
            Some(&s) => owner[i] = s,
            None if full_labels.contains(&label) => bins.entry(bin(&cell.w)).or_default().push(i),
            None => return Err(invalid(format!("label {label} has no constraint set"))),
        }
    }
    let centered: Vec<Result<UnitSimplex>> = bins
        .keys()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|key| {
            let center = key.map(|k| k as f64 * FULL_BIN);
            let target = StatePoint::from_coords(2, &center)?;
            let parts: Vec<u64> = std::iter::once(7).chain(key.iter().map(|&k| k as u64)).collect();
            UnitSimplex::new(select_extreme_points(&target, &unit_params(), mix(seed, &parts))?)
        })
        .collect();
    for ((_, members), simplex) in bins.iter().zip(centered) {
        let simplex = simplex.ok();
        let shared = simplices.len() as u32;
        let mut used = false;
        for &i in members {
            match &simplex {
                Some(s) if strictly_inside(s, &cells[i].w) => {
                    owner[i] = shared;
                    used = true;
                }
                _ => {}
            }
        }
        if used {
            simplices.push(simplex.unwrap());
        }
        for &i in members {
            if owner[i] == u32::MAX {
                let cell = &cells[i];
                let target = StatePoint::from_coords(2, &cell.w)?;
                let d = select_extreme_points(&target, &unit_params(), mix(seed, &[8, cell.slice as u64, cell.node as u64]))
                    .map_err(|e| Error::Covering(format!("no simplex for node {} at slice {}: {e}", cell.node, cell.slice)))?;
                simplices.push(UnitSimplex::new(d)?);
                owner[i] = simplices.len() as u32 - 1;
            }
        }
    }
    Ok((simplices, owner))
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

#[allow(clippy::too_many_arguments)]
fn wave_step(
    s: &mut Sample,
    simplex: &UnitSimplex,
    cache: &WaveCache,
    stage: usize,
    eta: f64,
    side: f64,
    source_zero: bool,
    key: u64,
) -> Result<Outcome> {
    let mu = simplex.weights(&s.w);
    let slack = mu.iter().copied().fold(f64::INFINITY, f64::min);
    let margin = (2.0 * eta).min(slack);
    if !(margin > 1e-14) {
        return Ok(Outcome::Idle);
    }
    let w = StatePoint::from_coords(2, &s.w)?;
    let plan = match plan_wave_step_with_weights(&w, &simplex.decomp, &mu, margin, mix(key, &[0])) {
        Ok(p) => p,
        Err(Error::NoFeasiblePair { .. }) => return Ok(Outcome::Idle),
        Err(e) => return Err(e),
    };
    let (i, j) = plan.pair;
    let floor = 0.5 * margin;
    let (mut la, mut lb) = (mu[j] - floor, mu[i] - floor);
    if !(la > 0.0 && lb > 0.0) {
        return Ok(Outcome::Idle);
    }
    let bins = cache.bins();
    let mu1 = lb / (la + lb);
    let qi = ((mu1 * bins as f64).round() as usize).clamp(1, bins - 1);
    let q = qi as f64 / bins as f64;
    if q < mu1 {
        lb = q * la / (1.0 - q);
    } else {
        la = lb * (1.0 - q) / q;
    }
    let scale = la + lb;

    let (sm, su) = s.scales();
    let bin = if source_zero { 0 } else { cache.source_bin(side * sm / su) };
    let entry = cache.kernel(
        KernelKey { simplex: s.simplex, pair: (i as u8, j as u8), stage: stage as u32, bin },
        &simplex.decomp,
    )?;
    let (tower, sups) = cache.tower(qi)?;
    let eps = floor / (2.0 * simplex.sensitivity);
    let (lambda, m) = cache.frequency(&entry, sups, scale, eps)?;

    let mut rng = ChaCha8Rng::seed_from_u64(mix(key, &[1]));
    let z: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let k = &entry.kernel;
    let phase = lambda * (k.xi[0] * (z[0] - 0.5) + k.xi[1] * (z[1] - 0.5) + k.tau * (z[2] - 0.5));
    let hd = tower.eval_derivatives(phase);
    let cut = &cache.cutoff;
    let ax = [cut.axis_derivatives(0, z[0]), cut.axis_derivatives(1, z[1]), cut.axis_derivatives(2, z[2])];
    let mut out = [0.0; 5];
    k.value.eval(lambda, &hd, &ax, &mut out);
    let inc = StatePoint::planar([out[0], out[1]], 0.5 * (out[2] - out[4]), out[3]);
    let c = inc.coords();
    let next = [s.w[0] + scale * c[0], s.w[1] + scale * c[1], s.w[2] + scale * c[2], s.w[3] + scale * c[3]];
    if simplex.weights(&next).iter().any(|&x| !(x > 0.0)) {
        return Ok(Outcome::Rejected);
    }
    s.w = next;
    Ok(Outcome::Moved(m))
}

/// Largest difference quotient of `(rho, q, w)` between neighbouring cells of `D`.
fn base_lipschitz(base: &SubsolutionState, region: &SpaceTimeRegion) -> (f64, usize) {
    let grid = base.grid;
    let n = grid.resolution;
    let h = grid.spacing();
    let dt = region.dt();
    let value = |sl: &Slice, node: usize| {
        let (rho, q) = sl.params_at(node);
        let c = sl.state_at(node);
        [rho, q, c.coords()[0], c.coords()[1], c.coords()[2], c.coords()[3]]
    };
    let diff = |a: [f64; 6], b: [f64; 6]| a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut best = (0.0, 0);
    for j in 0..region.slices() {
        if region.time_cell(j).is_none() {
            continue;
        }
        let sl = &base.slices[j];
        for node in (0..grid.nodes()).filter(|&i| region.mask[i]) {
            let v = value(sl, node);
            let (i1, i2) = (node / n, node % n);
            let right = i1 * n + (i2 + 1) % n;
            let down = ((i1 + 1) % n) * n + i2;
            let mut quotients = Vec::with_capacity(3);
            for nb in [right, down] {
                if region.mask[nb] {
                    quotients.push(diff(v, value(sl, nb)) / h);
                }
            }
            if j + 1 < region.slices() && region.time_cell(j + 1).is_some() {
                quotients.push(diff(v, value(&base.slices[j + 1], node)) / dt);
            }
            for qv in quotients {
                if qv > best.0 {
                    best = (qv, node);
                }
            }
        }
    }
    best
}
