use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::decompose::affine_rank;
use super::hull::k_point;
use super::state::{ConstraintParams, StatePoint};

/// Sample `count` extreme points whose directions lie within angle `delta` of `xi0`.
pub fn sample_extreme_neighborhood(
    p: &ConstraintParams,
    xi0: &[f64],
    delta: f64,
    count: usize,
    seed: u64,
) -> Vec<StatePoint> {
    let n = xi0.len();
    let norm = xi0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let e: Vec<f64> = xi0.iter().map(|x| x / norm).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            if n == 2 {
                let a = e[1].atan2(e[0]) + delta * (2.0 * rng.gen::<f64>() - 1.0);
                k_point(p, &[a.cos(), a.sin()])
            } else {
                let (u, v) = tangent_pair(&e);
                let ang = delta * rng.gen::<f64>().sqrt();
                let phi = std::f64::consts::TAU * rng.gen::<f64>();
                let xi: Vec<f64> = (0..3)
                    .map(|i| e[i] * ang.cos() + ang.sin() * (phi.cos() * u[i] + phi.sin() * v[i]))
                    .collect();
                k_point(p, &xi)
            }
        })
        .collect()
}

fn tangent_pair(e: &[f64]) -> ([f64; 3], [f64; 3]) {
    let a = if e[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d: f64 = (0..3).map(|i| a[i] * e[i]).sum();
    let mut u = [a[0] - d * e[0], a[1] - d * e[1], a[2] - d * e[2]];
    let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= un);
    let v = [e[1] * u[2] - e[2] * u[1], e[2] * u[0] - e[0] * u[2], e[0] * u[1] - e[1] * u[0]];
    (u, v)
}

/// Affine rank of a sample of extreme points (relative singular-value cutoff).
pub fn sample_affine_rank(points: &[StatePoint], tol: f64) -> usize {
    let pts: Vec<Vec<f64>> = points.iter().map(|w| w.coords().to_vec()).collect();
    affine_rank(&pts, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::state_dim;

    #[test]
    fn small_neighborhoods_still_span() {
        let p = ConstraintParams::new(1.0, 0.5).unwrap();
        for delta in [0.3, 0.1, 0.03] {
            let pts = sample_extreme_neighborhood(&p, &[1.0, 0.0], delta, 200, 4);
            assert_eq!(sample_affine_rank(&pts, 1e-9), state_dim(2));
        }
    }
}
