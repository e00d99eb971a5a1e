use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::atom::{iso_norm, LambdaRule, WaveAtom, WaveOptions, VALUE_COMPONENTS};
use crate::error::Result;
use crate::geometry::{StatePoint, WaveDirection};
use crate::profiles::PlateauCutoff;
use crate::quad::gauss_legendre;

/// Sup of the segment distance over cell centers of a `per_axis^3` grid.
pub fn grid_sup_distance(atom: &WaveAtom, per_axis: usize) -> f64 {
    let c = &atom.cutoff;
    let mut best: f64 = 0.0;
    for i in 0..per_axis {
        for j in 0..per_axis {
            for k in 0..per_axis {
                let z = [
                    c.center[0] + c.half_widths[0] * (2.0 * (i as f64 + 0.5) / per_axis as f64 - 1.0),
                    c.center[1] + c.half_widths[1] * (2.0 * (j as f64 + 0.5) / per_axis as f64 - 1.0),
                    c.center[2] + c.half_widths[2] * (2.0 * (k as f64 + 0.5) / per_axis as f64 - 1.0),
                ];
                best = best.max(atom.segment_distance(&z));
            }
        }
    }
    best
}

/// Uniform random points in the atom's box.
pub fn random_points(cutoff: &PlateauCutoff, count: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut z = [0.0; 3];
            for (a, v) in z.iter_mut().enumerate() {
                *v = cutoff.center[a] + cutoff.half_widths[a] * (2.0 * rng.gen::<f64>() - 1.0);
            }
            z
        })
        .collect()
}

pub fn sampled_sup_distance(atom: &WaveAtom, points: &[[f64; 3]]) -> f64 {
    points.iter().map(|z| atom.segment_distance(z)).fold(0.0, f64::max)
}

/// Residual summary of one atom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveResidual {
    /// `sup |div n~|` from the analytic tables.
    pub divergence: f64,
    /// `sup |d_t n~ + div V~ - B n~|` from the analytic tables.
    pub momentum: f64,
    /// `sup |d_t n~ + div V~|`, which is not small when `B != 0`.
    pub homogeneous_momentum: f64,
    /// `sup |tr V~|`.
    pub trace: f64,
    /// Largest exact spatial integral over the checked time slices.
    pub mean: f64,
    /// The same divergence and momentum residuals from order-8 central differences.
    pub fd_divergence: f64,
    pub fd_momentum: f64,
    /// Largest gap between analytic and finite-difference first derivatives.
    pub fd_derivative_gap: f64,
    pub fd_points: usize,
    pub amplitude: f64,
}

const FD_WEIGHTS: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

fn region_signature(atom: &WaveAtom, z: &[f64; 3]) -> (usize, [i8; 3]) {
    let tower = atom.tower.as_ref().unwrap();
    let s = atom.phase(z);
    let r = s - s.floor();
    let piece = tower.levels[0].poly.locate(r) + 16 * (s.floor() as i64).rem_euclid(1 << 20) as usize;
    let mut ax = [0i8; 3];
    for (a, v) in ax.iter_mut().enumerate() {
        let y = (z[a] - atom.cutoff.center[a]) / atom.cutoff.half_widths[a];
        let ay = y.abs();
        *v = if ay <= atom.cutoff.inner_fraction {
            0
        } else if ay < 1.0 {
            if y > 0.0 {
                1
            } else {
                -1
            }
        } else {
            2
        };
    }
    (piece, ax)
}

/// Derivative of the raw value along `axis` by order-8 central differences, or
/// `None` when the stencil crosses a breakpoint of the profile or cutoff.
fn fd_derivative(atom: &WaveAtom, z: &[f64; 3], axis: usize, h: f64) -> Option<[f64; VALUE_COMPONENTS]> {
    let sig = region_signature(atom, z);
    let mut out = [0.0; VALUE_COMPONENTS];
    for (k, w) in FD_WEIGHTS.iter().enumerate() {
        let off = (k + 1) as f64 * h;
        let mut zp = *z;
        let mut zm = *z;
        zp[axis] += off;
        zm[axis] -= off;
        if region_signature(atom, &zp) != sig || region_signature(atom, &zm) != sig {
            return None;
        }
        let (fp, fm) = (atom.evaluate_raw(&zp), atom.evaluate_raw(&zm));
        for c in 0..VALUE_COMPONENTS {
            out[c] += w * (fp[c] - fm[c]) / h;
        }
    }
    Some(out)
}

/// Residuals at the given points plus exact slice means at `mean_times`.
pub fn wave_residual(atom: &WaveAtom, points: &[[f64; 3]], mean_times: &[f64]) -> WaveResidual {
    let mut r = WaveResidual {
        divergence: 0.0,
        momentum: 0.0,
        homogeneous_momentum: 0.0,
        trace: 0.0,
        mean: 0.0,
        fd_divergence: 0.0,
        fd_momentum: 0.0,
        fd_derivative_gap: 0.0,
        fd_points: 0,
        amplitude: atom.amplitude(),
    };
    if atom.is_zero() {
        return r;
    }
    let b = atom.source_matrix;
    let h = 2e-3 / atom.lambda.max(1.0) * atom.cutoff.half_widths.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0);
    for z in points {
        let res = atom.residual_raw(z);
        let v = atom.evaluate_raw(z);
        r.divergence = r.divergence.max(res[0].abs());
        r.momentum = r.momentum.max(res[1].hypot(res[2]));
        r.homogeneous_momentum = r.homogeneous_momentum.max(res[3].hypot(res[4]));
        r.trace = r.trace.max((v[2] + v[4]).abs());
        let d: Vec<Option<[f64; 5]>> = (0..3).map(|a| fd_derivative(atom, z, a, h)).collect();
        if d.iter().all(|x| x.is_some()) {
            let d0 = d[0].unwrap();
            let d1 = d[1].unwrap();
            let dt = d[2].unwrap();
            let div = d0[0] + d1[1];
            let m0 = dt[0] + d0[2] + d1[3] - b[0][0] * v[0] - b[0][1] * v[1];
            let m1 = dt[1] + d0[3] + d1[4] - b[1][0] * v[0] - b[1][1] * v[1];
            r.fd_divergence = r.fd_divergence.max(div.abs());
            r.fd_momentum = r.fd_momentum.max(m0.hypot(m1));
            let gap = (div - res[0]).abs().max((m0 - res[1]).abs()).max((m1 - res[2]).abs());
            r.fd_derivative_gap = r.fd_derivative_gap.max(gap);
            r.fd_points += 1;
        }
    }
    for &t in mean_times {
        let m = slice_integral(atom, t);
        r.mean = r.mean.max(iso_norm(&m));
    }
    r
}

/// Exact spatial integral of the atom at time `t`.
///
/// In rotated coordinates `s = xi.(x - c)`, `r` orthogonal, every term is a
/// profile derivative in `s` times cutoff derivatives that are piecewise
/// polynomial along lines. Integrating first in `r` (Gauss rules on the exact
/// polynomial pieces) and then in `s` (Gauss rules between all breakpoints) is
/// exact up to rounding.
pub fn slice_integral(atom: &WaveAtom, t: f64) -> [f64; VALUE_COMPONENTS] {
    let mut total = [0.0; VALUE_COMPONENTS];
    if atom.is_zero() {
        return total;
    }
    let c = &atom.cutoff;
    let (c1, c2, ct) = (c.center[0], c.center[1], c.center[2]);
    let (r1, r2) = (c.half_widths[0], c.half_widths[1]);
    let a = c.inner_fraction;
    if (t - ct).abs() >= c.half_widths[2] {
        return total;
    }
    let tax = c.axis_derivatives(2, t);
    let (x1, x2) = (atom.direction.xi[0], atom.direction.xi[1]);
    let tower = atom.tower.as_ref().unwrap();
    let kernel = atom.kernel.as_ref().unwrap();
    let lambda = atom.lambda;
    let shift = atom.direction.tau * (t - ct);

    let half_span = x1.abs() * r1 + x2.abs() * r2;
    let mut sb: Vec<f64> = Vec::new();
    for p in [-r1, -a * r1, a * r1, r1] {
        for q in [-r2, -a * r2, a * r2, r2] {
            sb.push(x1 * p + x2 * q);
        }
    }
    let bps = tower.breakpoints();
    let k_lo = (lambda * (-half_span + shift)).floor() as i64 - 1;
    let k_hi = (lambda * (half_span + shift)).ceil() as i64 + 1;
    for k in k_lo..=k_hi {
        for &b in &bps {
            let s = (k as f64 + b) / lambda - shift;
            if s.abs() < half_span {
                sb.push(s);
            }
        }
    }
    sb.retain(|s| s.abs() <= half_span);
    sb.push(-half_span);
    sb.push(half_span);
    sb.sort_by(f64::total_cmp);
    sb.dedup_by(|x, y| (*x - *y).abs() < 1e-15);

    let (gs, gw) = gauss_legendre(24);
    let (gr, gwr) = gauss_legendre(14);
    let mut lp = [0.0; 9];
    for (j, v) in lp.iter_mut().enumerate() {
        *v = lambda.powi(j as i32 - 6);
    }
    for win in sb.windows(2) {
        let (sa, sbb) = (win[0], win[1]);
        if sbb - sa <= 0.0 {
            continue;
        }
        let hs = 0.5 * (sbb - sa);
        let ms = 0.5 * (sa + sbb);
        for (xs, ws) in gs.iter().zip(&gw) {
            let s = ms + hs * xs;
            let g = line_moments(s, x1, x2, r1, r2, a, c, c1, c2, &gr, &gwr);
            let hd = tower.eval_derivatives(lambda * (s + shift));
            for term in &kernel.value.terms {
                let (b0, b1, bt) = (term.beta[0] as usize, term.beta[1] as usize, term.beta[2] as usize);
                let f = lp[term.j as usize] * hd[term.j as usize] * g[b0][b1] * tax[bt] * ws * hs;
                if f != 0.0 {
                    for (o, cc) in total.iter_mut().zip(&term.c) {
                        *o += cc * f;
                    }
                }
            }
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn line_moments(
    s: f64,
    x1: f64,
    x2: f64,
    r1: f64,
    r2: f64,
    a: f64,
    cut: &PlateauCutoff,
    c1: f64,
    c2: f64,
    gr: &[f64],
    gwr: &[f64],
) -> [[f64; 8]; 8] {
    let mut g = [[0.0; 8]; 8];
    let mut rb: Vec<f64> = Vec::with_capacity(10);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    if x2.abs() > 1e-15 {
        for p in [-r1, -a * r1, a * r1, r1] {
            rb.push((x1 * s - p) / x2);
        }
        let e1 = (x1 * s - r1) / x2;
        let e2 = (x1 * s + r1) / x2;
        lo = lo.max(e1.min(e2));
        hi = hi.min(e1.max(e2));
    } else if (x1 * s).abs() >= r1 {
        return g;
    }
    if x1.abs() > 1e-15 {
        for q in [-r2, -a * r2, a * r2, r2] {
            rb.push((q - x2 * s) / x1);
        }
        let e1 = (-r2 - x2 * s) / x1;
        let e2 = (r2 - x2 * s) / x1;
        lo = lo.max(e1.min(e2));
        hi = hi.min(e1.max(e2));
    } else if (x2 * s).abs() >= r2 {
        return g;
    }
    if !(hi > lo) {
        return g;
    }
    rb.retain(|r| *r > lo && *r < hi);
    rb.push(lo);
    rb.push(hi);
    rb.sort_by(f64::total_cmp);
    for win in rb.windows(2) {
        let (ra, rbb) = (win[0], win[1]);
        if rbb - ra <= 0.0 {
            continue;
        }
        let hr = 0.5 * (rbb - ra);
        let mr = 0.5 * (ra + rbb);
        for (xr, wr) in gr.iter().zip(gwr) {
            let r = mr + hr * xr;
            let p1 = cut.axis_derivatives(0, c1 + x1 * s - x2 * r);
            let p2 = cut.axis_derivatives(1, c2 + x2 * s + x1 * r);
            let w = wr * hr;
            for i in 0..8 {
                if p1[i] == 0.0 {
                    continue;
                }
                for j in 0..8 {
                    g[i][j] += w * p1[i] * p2[j];
                }
            }
        }
    }
    g
}

/// Measures of the near-endpoint sets and the rest, by cell-center quadrature
/// on a `2^6`-per-axis grid of the box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionMeasures {
    pub near_w1: f64,
    pub near_w2: f64,
    pub rest: f64,
    pub box_measure: f64,
    pub threshold: f64,
    /// Whether `| |O_i| - mu_i |O| | < eps` holds for both endpoints.
    pub within_eps: bool,
}

pub fn partition_measures(atom: &WaveAtom, eps: f64) -> PartitionMeasures {
    let per_axis = 64usize;
    let c = &atom.cutoff;
    let vol: f64 = c.half_widths.iter().map(|r| 2.0 * r).product();
    let amp = atom.w2.dist(&atom.w1);
    let thr = (0.5 * eps).min(0.25 * amp);
    let cell = vol / (per_axis * per_axis * per_axis) as f64;
    let (mut o1, mut o2) = (0.0, 0.0);
    for i in 0..per_axis {
        for j in 0..per_axis {
            for k in 0..per_axis {
                let z = [
                    c.center[0] + c.half_widths[0] * (2.0 * (i as f64 + 0.5) / per_axis as f64 - 1.0),
                    c.center[1] + c.half_widths[1] * (2.0 * (j as f64 + 0.5) / per_axis as f64 - 1.0),
                    c.center[2] + c.half_widths[2] * (2.0 * (k as f64 + 0.5) / per_axis as f64 - 1.0),
                ];
                let w = atom.base.add(&atom.evaluate(&z));
                if w.dist(&atom.w1) < thr {
                    o1 += cell;
                } else if w.dist(&atom.w2) < thr {
                    o2 += cell;
                }
            }
        }
    }
    let within_eps = (o1 / vol - atom.mu1).abs() < eps && (o2 / vol - atom.mu2).abs() < eps;
    PartitionMeasures { near_w1: o1, near_w2: o2, rest: vol - o1 - o2, box_measure: vol, threshold: thr, within_eps }
}

/// Rescaled copies of one atom over the `2^{3k}` dyadic subcubes of `[0,1]^3`.
///
/// The base atom oscillates between `-wbar` and `+wbar` with equal weights; each
/// copy lives on its own subcube with frequency `lambda 2^k`.
pub fn tile_wave(
    direction: &WaveDirection,
    k: u32,
    source: [[f64; 2]; 2],
    lambda: f64,
    inner_fraction: f64,
    opts: &WaveOptions,
) -> Result<Vec<WaveAtom>> {
    let wbar = direction.profile.clone();
    let w1 = wbar.scale(-1.0);
    let w2 = wbar.clone();
    let mut dir = direction.clone();
    dir.profile = w2.sub(&w1);
    let kernel = std::sync::Arc::new(super::atom::WaveKernel::new(&dir, source, opts.correction)?);
    let cells = 1usize << k;
    let side = 1.0 / cells as f64;
    let local = WaveOptions { rule: LambdaRule::Fixed, ..*opts };
    let mut atoms = Vec::with_capacity(cells.pow(3));
    for i in 0..cells {
        for j in 0..cells {
            for l in 0..cells {
                let center = vec![(i as f64 + 0.5) * side, (j as f64 + 0.5) * side, (l as f64 + 0.5) * side];
                let cutoff = PlateauCutoff::new(center, vec![0.5 * side; 3], inner_fraction)?;
                atoms.push(WaveAtom::build_with_direction(
                    &StatePoint::zero(2),
                    &w1,
                    &w2,
                    dir.clone(),
                    cutoff,
                    1.0,
                    source,
                    lambda * cells as f64,
                    &local,
                    Some(kernel.clone()),
                )?);
            }
        }
    }
    Ok(atoms)
}

/// Evaluate a dyadic tiling produced by [`tile_wave`] at `z` in `[0,1)^3`.
pub fn eval_tiling(atoms: &[WaveAtom], k: u32, z: &[f64; 3]) -> StatePoint {
    let cells = 1usize << k;
    let idx = |x: f64| ((x * cells as f64).floor() as usize).min(cells - 1);
    let (i, j, l) = (idx(z[0]), idx(z[1]), idx(z[2]));
    atoms[(i * cells + j) * cells + l].evaluate(z)
}
