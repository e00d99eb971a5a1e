use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hull::{fibonacci_sphere, hull_margin, k_point, maximize_on_sphere};
use super::lp::{self, LpStatus};
use super::state::{simplex_size, state_dim, ConstraintParams, StatePoint};
use crate::error::{Error, Result};

/// Extreme points of `K_{rho,q}` whose open simplex contains a target state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimplexDecomposition {
    pub params: ConstraintParams,
    pub target: StatePoint,
    pub vertices: Vec<StatePoint>,
    /// Unit directions `xi_l` generating each vertex.
    pub directions: Vec<Vec<f64>>,
    /// Barycentric weights of the target.
    pub weights: Vec<f64>,
    /// Uniform slack certified by linear programming over the vertex set.
    pub slack: f64,
}

impl SimplexDecomposition {
    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    /// Barycentric coordinates of an arbitrary state with respect to the vertices.
    pub fn barycentric(&self, w: &StatePoint) -> Vec<f64> {
        barycentric(&self.vertices, w).unwrap_or_else(|| vec![f64::NAN; self.vertices.len()])
    }

    /// Operator norm of the map from a state perturbation to barycentric weights.
    pub fn barycentric_sensitivity(&self) -> f64 {
        let a = vertex_matrix(&self.vertices);
        let inv = a.try_inverse().expect("vertices are affinely independent");
        let d = state_dim(self.dim());
        let block = inv.columns(0, d).into_owned();
        block.singular_values().max()
    }
}

/// Columns `(v_l, 1)` stacked as a square matrix.
pub(crate) fn vertex_matrix(vertices: &[StatePoint]) -> DMatrix<f64> {
    let d = vertices[0].coords().len();
    DMatrix::from_fn(d + 1, vertices.len(), |r, c| if r < d { vertices[c].coords()[r] } else { 1.0 })
}

/// Barycentric weights of `w`; `None` if the vertices are affinely dependent.
pub fn barycentric(vertices: &[StatePoint], w: &StatePoint) -> Option<Vec<f64>> {
    let a = vertex_matrix(vertices);
    let mut rhs = DVector::from_iterator(w.coords().len() + 1, w.coords().iter().copied().chain([1.0]));
    let lu = a.lu();
    if !lu.solve_mut(&mut rhs) {
        return None;
    }
    Some(rhs.iter().copied().collect())
}

/// Number of singular values of the centered vertex matrix above `tol` (relative).
pub fn affine_rank(points: &[Vec<f64>], tol: f64) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let d = points[0].len();
    let k = points.len() as f64;
    let mean: Vec<f64> = (0..d).map(|i| points.iter().map(|p| p[i]).sum::<f64>() / k).collect();
    let m = DMatrix::from_fn(d, points.len(), |r, c| points[c][r] - mean[r]);
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Result of the linear-programming membership test for `conv K`.
#[derive(Debug, Clone)]
pub struct HullMembership {
    pub inside: bool,
    pub infeasibility: f64,
    pub generated_columns: usize,
}

fn random_directions(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    if n == 2 {
        let off: f64 = rng.gen::<f64>() * std::f64::consts::TAU / count as f64;
        (0..count)
            .map(|k| {
                let a = off + std::f64::consts::TAU * k as f64 / count as f64;
                [a.cos(), a.sin(), 0.0]
            })
            .collect()
    } else {
        let r = random_rotation(rng);
        fibonacci_sphere(count)
            .into_iter()
            .map(|p| {
                let mut q = [0.0; 3];
                for i in 0..3 {
                    q[i] = (0..3).map(|j| r[i][j] * p[j]).sum();
                }
                q
            })
            .collect()
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let m = nalgebra::Matrix3::from_fn(|_, _| rng.gen::<f64>() - 0.5);
    let q = m.qr().q();
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = q[(i, j)];
        }
    }
    r
}

struct ColumnLp {
    n: usize,
    unit: ConstraintParams,
    dirs: Vec<[f64; 3]>,
}

impl ColumnLp {
    fn column(&self, xi: &[f64; 3]) -> Vec<f64> {
        let k = k_point(&self.unit, &xi[..self.n]);
        k.coords().iter().copied().chain([1.0]).collect()
    }

    /// Phase-one feasibility with column generation over the whole curve or sphere.
    fn solve(&mut self, target: &StatePoint, max_generated: usize) -> (lp::LpSolution, usize) {
        let b: Vec<f64> = target.coords().iter().copied().chain([1.0]).collect();
        let rows = b.len();
        let mut generated = 0;
        loop {
            let cols: Vec<Vec<f64>> = self.dirs.iter().map(|x| self.column(x)).collect();
            let a: Vec<Vec<f64>> = (0..rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
            let c = vec![0.0; cols.len()];
            let sol = lp::solve(&a, &b, &c, 1e-11);
            if sol.status != LpStatus::Infeasible || generated >= max_generated {
                return (sol, generated);
            }
            let y = sol.duals.clone();
            let (best, xi) = maximize_on_sphere(self.n, |xi| {
                let col = self.column(xi);
                col.iter().zip(&y).map(|(a, b)| a * b).sum()
            });
            if best <= 1e-10 {
                return (sol, generated);
            }
            self.dirs.push(xi);
            generated += 1;
        }
    }
}

/// Exact membership of `w` in the convex hull of `K_{rho,q}` by linear programming
/// over `samples` sampled extreme points plus column generation.
pub fn hull_membership_lp(w: &StatePoint, p: &ConstraintParams, samples: usize, seed: u64) -> HullMembership {
    let n = w.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = ConstraintParams { rho: 1.0, q: 1.0 / n as f64 };
    let mut clp = ColumnLp { n, unit, dirs: random_directions(n, samples, &mut rng) };
    let (sol, generated) = clp.solve(&w.to_unit(p), 400);
    HullMembership {
        inside: sol.status == LpStatus::Optimal,
        infeasibility: sol.infeasibility,
        generated_columns: generated,
    }
}

fn min_weight(n: usize, unit: &ConstraintParams, dirs: &[[f64; 3]], target: &StatePoint) -> (f64, Option<Vec<f64>>) {
    let verts: Vec<StatePoint> = dirs.iter().map(|x| k_point(unit, &x[..n])).collect();
    let pts: Vec<Vec<f64>> = verts.iter().map(|v| v.coords().to_vec()).collect();
    if affine_rank(&pts, 1e-8) < state_dim(n) {
        return (f64::NEG_INFINITY, None);
    }
    match barycentric(&verts, target) {
        Some(mu) => (mu.iter().copied().fold(f64::INFINITY, f64::min), Some(mu)),
        None => (f64::NEG_INFINITY, None),
    }
}

fn rotate_direction(n: usize, x: &[f64; 3], step: f64, which: usize) -> [f64; 3] {
    if n == 2 {
        let a = x[1].atan2(x[0]) + if which == 0 { step } else { -step };
        [a.cos(), a.sin(), 0.0]
    } else {
        let a = if x[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let d: f64 = (0..3).map(|i| a[i] * x[i]).sum();
        let mut e1 = [a[0] - d * x[0], a[1] - d * x[1], a[2] - d * x[2]];
        let n1 = (e1.iter().map(|v| v * v).sum::<f64>()).sqrt();
        e1.iter_mut().for_each(|v| *v /= n1);
        let e2 = [x[1] * e1[2] - x[2] * e1[1], x[2] * e1[0] - x[0] * e1[2], x[0] * e1[1] - x[1] * e1[0]];
        let (e, s) = match which {
            0 => (e1, step),
            1 => (e1, -step),
            2 => (e2, step),
            _ => (e2, -step),
        };
        let mut y = [0.0; 3];
        for i in 0..3 {
            y[i] = x[i] * s.cos() + e[i] * s.sin();
        }
        y
    }
}

/// Greedy coordinate ascent on the smallest barycentric weight.
fn improve_slack(n: usize, unit: &ConstraintParams, dirs: &mut [[f64; 3]], target: &StatePoint, goal: f64) -> f64 {
    let moves = if n == 2 { 2 } else { 4 };
    let mut best = min_weight(n, unit, dirs, target).0;
    let mut step = 0.1;
    let mut sweeps = 0;
    while step > 1e-6 && best < goal && sweeps < 400 {
        sweeps += 1;
        let mut improved = false;
        for l in 0..dirs.len() {
            let orig = dirs[l];
            let mut local_best = (best, orig);
            for mv in 0..moves {
                dirs[l] = rotate_direction(n, &orig, step, mv);
                let v = min_weight(n, unit, dirs, target).0;
                if v > local_best.0 {
                    local_best = (v, dirs[l]);
                }
            }
            dirs[l] = local_best.1;
            if local_best.0 > best {
                best = local_best.0;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Choose `N_n + 1` extreme points of `K_{rho,q}` whose simplex strictly contains
/// `target`. Deterministic in `seed`.
pub fn select_extreme_points(target: &StatePoint, p: &ConstraintParams, seed: u64) -> Result<SimplexDecomposition> {
    let n = target.dim();
    let tolerance = 1e-12 * (1.0 + p.rho * p.q);
    let margin = hull_margin(target, p);
    if !(margin > tolerance) {
        return Err(Error::NotInterior { margin, tolerance });
    }
    let unit = ConstraintParams { rho: 1.0, q: 1.0 / n as f64 };
    let t = target.to_unit(p);
    let size = simplex_size(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let goal = 0.25 / size as f64;

    let mut best: Option<(f64, Vec<[f64; 3]>)> = None;
    if n == 2 {
        let off: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        for r in 0..24 {
            let a0 = off + r as f64 * std::f64::consts::TAU / (5.0 * 24.0);
            let dirs: Vec<[f64; 3]> = (0..5)
                .map(|k| {
                    let a = a0 + std::f64::consts::TAU * k as f64 / 5.0;
                    [a.cos(), a.sin(), 0.0]
                })
                .collect();
            let (v, _) = min_weight(n, &unit, &dirs, &t);
            if best.as_ref().map_or(true, |b| v > b.0) {
                best = Some((v, dirs));
            }
        }
    }

    if best.as_ref().map_or(true, |b| b.0 < goal) {
        let mut samples = 64;
        while samples <= 4096 {
            let mut clp = ColumnLp { n, unit, dirs: random_directions(n, samples, &mut rng) };
            let (sol, _) = clp.solve(&t, 400);
            if sol.status == LpStatus::Optimal {
                let mut chosen: Vec<[f64; 3]> =
                    sol.x.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(j, _)| clp.dirs[j]).collect();
                while chosen.len() < size {
                    let extra = random_directions(n, 1, &mut rng)[0];
                    chosen.push(extra);
                }
                chosen.truncate(size);
                let (v, _) = min_weight(n, &unit, &chosen, &t);
                if best.as_ref().map_or(true, |b| v > b.0) {
                    best = Some((v, chosen));
                }
                break;
            }
            samples *= 2;
        }
    }

    let Some((_, mut dirs)) = best else {
        return Err(Error::Degenerate { retries: 0, best_slack: f64::NEG_INFINITY });
    };
    let mut slack = improve_slack(n, &unit, &mut dirs, &t, goal);

    let mut retries = 0;
    if slack <= 1e-9 {
        let delta0 = (0..dirs.len())
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| {
                let d: f64 = (0..3).map(|k| dirs[i][k] * dirs[j][k]).sum();
                d.clamp(-1.0, 1.0).acos()
            })
            .fold(f64::INFINITY, f64::min);
        let mut step = 1e-3 * delta0;
        while retries < 20 && slack <= 1e-9 {
            retries += 1;
            let mut trial = dirs.clone();
            let mu = min_weight(n, &unit, &trial, &t).1;
            for l in 0..trial.len() {
                let offending = mu.as_ref().map_or(true, |m| m[l] <= 1e-9);
                if offending {
                    let mv = rng.gen_range(0..if n == 2 { 2 } else { 4 });
                    trial[l] = rotate_direction(n, &trial[l], step * rng.gen::<f64>(), mv);
                }
            }
            let v = min_weight(n, &unit, &trial, &t).0;
            if v > slack {
                slack = v;
                dirs = trial;
            }
            step *= 0.5;
        }
        if slack <= 1e-9 {
            return Err(Error::Degenerate { retries, best_slack: slack });
        }
    }

    let vertices: Vec<StatePoint> = dirs.iter().map(|x| k_point(p, &x[..n])).collect();
    let weights = barycentric(&vertices, target).ok_or(Error::Degenerate { retries, best_slack: slack })?;
    let certified = certify_uniform_slack(&vertices, target)?;
    Ok(SimplexDecomposition {
        params: *p,
        target: target.clone(),
        vertices,
        directions: dirs.iter().map(|x| x[..n].to_vec()).collect(),
        weights,
        slack: certified,
    })
}

/// Largest `s` such that `target = sum mu_l v_l` with every `mu_l >= s`.
pub fn certify_uniform_slack(vertices: &[StatePoint], target: &StatePoint) -> Result<f64> {
    let k = vertices.len();
    let d = target.coords().len();
    let mut a = vec![vec![0.0; k + 1]; d + 1];
    for (l, v) in vertices.iter().enumerate() {
        for r in 0..d {
            a[r][l] = v.coords()[r];
            a[r][k] += v.coords()[r];
        }
        a[d][l] = 1.0;
    }
    a[d][k] = k as f64;
    let b: Vec<f64> = target.coords().iter().copied().chain([1.0]).collect();
    let mut c = vec![0.0; k + 1];
    c[k] = -1.0;
    let sol = lp::solve(&a, &b, &c, 1e-13);
    match sol.status {
        LpStatus::Optimal => Ok(sol.x[k]),
        LpStatus::Infeasible => Ok(0.0),
        LpStatus::Unbounded => Err(Error::Lp("uniform slack program is unbounded".into())),
    }
}
