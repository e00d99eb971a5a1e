use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::decompose::SimplexDecomposition;
use super::state::{StatePoint, WaveDirection};
use crate::error::{invalid, Error, Result};

/// Wave direction for a jump between two extreme points of the same `K_{rho,q}`.
///
/// `xi` is a unit vector orthogonal to `m2 - m1` (for `n = 2` the quarter turn,
/// normalized so its first nonzero component is positive) and
/// `tau = -(xi . m2) / rho`. The returned profile is `w2 - w1`.
pub fn wave_direction(w1: &StatePoint, w2: &StatePoint, rho: f64) -> Result<WaveDirection> {
    let n = w1.dim();
    let d: Vec<f64> = w2.m().iter().zip(w1.m()).map(|(a, b)| a - b).collect();
    let dn = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    if dn < 1e-14 * (1.0 + w1.norm() + w2.norm()) {
        return Err(invalid("momentum jump vanishes; the wave direction is undefined"));
    }
    let mut xi = if n == 2 {
        vec![-d[1] / dn, d[0] / dn]
    } else {
        let e: Vec<f64> = d.iter().map(|x| x / dn).collect();
        let k = (0..3).min_by(|&a, &b| e[a].abs().total_cmp(&e[b].abs())).unwrap();
        let mut a = [0.0; 3];
        a[k] = 1.0;
        let c = [e[1] * a[2] - e[2] * a[1], e[2] * a[0] - e[0] * a[2], e[0] * a[1] - e[1] * a[0]];
        let cn = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        c.iter().map(|x| x / cn).collect()
    };
    if let Some(first) = xi.iter().find(|x| x.abs() > 1e-15) {
        if *first < 0.0 {
            xi.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let tau = -xi.iter().zip(w2.m()).map(|(a, b)| a * b).sum::<f64>() / rho;
    Ok(WaveDirection { tau, xi, profile: w2.sub(w1) })
}

/// One binary split `w = mu1 w1 + mu2 w2` along an edge direction of the simplex.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WavePlan {
    pub w1: StatePoint,
    pub w2: StatePoint,
    pub mu1: f64,
    pub mu2: f64,
    /// Vertex pair `(i, j)`: the segment runs along `v_j - v_i`.
    pub pair: (usize, usize),
    pub direction: WaveDirection,
}

/// Smallest barycentric weight of `w` in the decomposition.
pub fn hull_slack(w: &StatePoint, decomp: &SimplexDecomposition) -> f64 {
    decomp.barycentric(w).into_iter().fold(f64::INFINITY, f64::min)
}

/// Split `w` along the edge `v_j - v_i` maximizing `mu_i mu_j |v_i - v_j|^2`.
///
/// At `w1` the weight of `v_j` drops to `margin / 2`; at `w2` the weight of `v_i`
/// does. Both endpoints keep every other weight unchanged, so their slack stays
/// at least `margin / 2`.
pub fn plan_wave_step(w: &StatePoint, decomp: &SimplexDecomposition, margin: f64, seed: u64) -> Result<WavePlan> {
    let mu = decomp.barycentric(w);
    plan_wave_step_with_weights(w, decomp, &mu, margin, seed)
}

/// [`plan_wave_step`] with the barycentric weights of `w` already known.
pub fn plan_wave_step_with_weights(
    w: &StatePoint,
    decomp: &SimplexDecomposition,
    mu: &[f64],
    margin: f64,
    seed: u64,
) -> Result<WavePlan> {
    let slack = mu.iter().copied().fold(f64::INFINITY, f64::min);
    if !(slack >= margin * (1.0 - 1e-12)) || !(margin > 0.0) {
        return Err(Error::SlackBelowMargin { slack, margin });
    }
    let floor = 0.5 * margin;
    let mut cands: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..mu.len() {
        for j in (i + 1)..mu.len() {
            if mu[i] > floor * (1.0 + 1e-9) && mu[j] > floor * (1.0 + 1e-9) {
                let d = decomp.vertices[i].dist(&decomp.vertices[j]);
                cands.push((mu[i] * mu[j] * d * d, i, j));
            }
        }
    }
    let top = cands.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<&(f64, usize, usize)> = cands.iter().filter(|c| c.0 >= top * (1.0 - 1e-12)).collect();
    if ties.is_empty() {
        return Err(Error::NoFeasiblePair { floor });
    }
    let pick = if ties.len() == 1 { 0 } else { ChaCha8Rng::seed_from_u64(seed).gen_range(0..ties.len()) };
    let (_, mut i, mut j) = *ties[pick];
    if ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9).gen::<bool>() {
        std::mem::swap(&mut i, &mut j);
    }
    split_along(w, decomp, mu, i, j, floor)
}

fn split_along(
    w: &StatePoint,
    decomp: &SimplexDecomposition,
    mu: &[f64],
    i: usize,
    j: usize,
    floor: f64,
) -> Result<WavePlan> {
    let e = decomp.vertices[j].sub(&decomp.vertices[i]);
    let s1 = -(mu[j] - floor);
    let s2 = mu[i] - floor;
    let w1 = w.axpy(s1, &e);
    let w2 = w.axpy(s2, &e);
    let mu1 = s2 / (s2 - s1);
    let mu2 = 1.0 - mu1;
    let mut direction = wave_direction(&decomp.vertices[i], &decomp.vertices[j], decomp.params.rho)?;
    direction.profile = w2.sub(&w1);
    Ok(WavePlan { w1, w2, mu1, mu2, pair: (i, j), direction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hull::k_point, select_extreme_points, ConstraintParams};

    #[test]
    fn wave_direction_oracle() {
        let w1 = StatePoint::planar([0.0, 0.0], 0.0, 0.0);
        let w2 = StatePoint::planar([1.0, -1.0], 0.0, 0.0);
        let d = wave_direction(&w1, &w2, 1.0).unwrap();
        let s = 0.5f64.sqrt();
        assert!((d.xi[0] - s).abs() < 1e-15 && (d.xi[1] - s).abs() < 1e-15);
        assert!(d.tau.abs() < 1e-15);

        let a = StatePoint::planar([1.0, 0.0], 0.0, 0.0);
        let b = StatePoint::planar([0.0, 1.0], 0.0, 0.0);
        let d = wave_direction(&a, &b, 1.0).unwrap();
        assert!((d.xi[0] - s).abs() < 1e-15 && (d.xi[1] - s).abs() < 1e-15);
        assert!((d.tau + s).abs() < 1e-15);
    }

    #[test]
    fn extreme_pair_is_compatible() {
        let p = ConstraintParams::new(1.4, 0.6).unwrap();
        for n in [2usize, 3] {
            let a = k_point(&p, &[0.3, 0.8, 0.1][..n]);
            let b = k_point(&p, &[-0.9, 0.2, 0.4][..n]);
            let d = wave_direction(&a, &b, p.rho).unwrap();
            assert!(d.compatibility_defect() < 1e-13 * (1.0 + d.profile.norm()));
        }
    }

    #[test]
    fn plan_keeps_endpoints_above_floor() {
        let p = ConstraintParams::new(1.0, 1.5).unwrap();
        let w = StatePoint::zero(2);
        let dec = select_extreme_points(&w, &p, 3).unwrap();
        let margin = 0.02;
        let plan = plan_wave_step(&w, &dec, margin, 9).unwrap();
        assert!((plan.mu1 * plan.w1.coords()[0] + plan.mu2 * plan.w2.coords()[0] - w.coords()[0]).abs() < 1e-13);
        let recon = plan.w1.scale(plan.mu1).add(&plan.w2.scale(plan.mu2));
        assert!(recon.dist(&w) < 1e-13);
        assert!((hull_slack(&plan.w1, &dec) - margin / 2.0).abs() < 1e-12);
        assert!((hull_slack(&plan.w2, &dec) - margin / 2.0).abs() < 1e-12);
        assert!(plan.direction.compatibility_defect() < 1e-12);
    }

    #[test]
    fn plan_rejects_thin_slack() {
        let p = ConstraintParams::new(1.0, 1.5).unwrap();
        let dec = select_extreme_points(&StatePoint::zero(2), &p, 3).unwrap();
        assert!(matches!(plan_wave_step(&StatePoint::zero(2), &dec, 0.5, 0), Err(Error::SlackBelowMargin { .. })));
    }
}
