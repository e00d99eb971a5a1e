use serde::{Deserialize, Serialize};

use super::laminate::StagedState;
use crate::ansatz::ConstraintSet;
use crate::geometry::StatePoint;

/// Clusters kept before the remaining mass is counted as off-cluster.
const MAX_CLUSTERS: usize = 4096;
/// Smallest fraction for a cluster to count as a state.
pub const SIGNIFICANT_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub rho: f64,
    /// Isometric coordinates `(m1, m2, u1, u2)` of the cluster mean.
    pub representative: [f64; 4],
    pub fraction: f64,
}

impl Cluster {
    pub fn state(&self) -> StatePoint {
        StatePoint::from_coords(2, &self.representative).expect("planar state")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub label: u32,
    pub tol: f64,
    /// Clusters sorted by decreasing fraction.
    pub clusters: Vec<Cluster>,
    /// Number of clusters holding at least [`SIGNIFICANT_FRACTION`].
    pub significant: usize,
    /// Mass outside the significant clusters.
    pub off_cluster: f64,
    /// Weights of the region's finite state set, when it has one.
    pub reference_weights: Option<Vec<f64>>,
    /// Mass of the significant clusters matched to each reference state.
    pub matched_fractions: Option<Vec<f64>>,
    /// Total-variation distance to the reference weights, unmatched mass
    /// counted as an extra state of weight zero.
    pub tv_distance: Option<f64>,
}

/// Clusters the values `(rho, m, U)` on region `label` within `tol`.
///
/// Inside `D` every chain is a sample; elsewhere the base nodal values are
/// used with their cell measure.
pub fn state_census(state: &StagedState, label: u32, tol: f64) -> Census {
    let mut points = state.labelled_values(label);
    if points.is_empty() {
        let h = state.base.grid.spacing();
        let dt = state.base.time.step();
        for sl in &state.base.slices {
            for (n, &l) in state.base.regions.iter().enumerate() {
                if l == label {
                    let c = sl.state_at(n);
                    let c = [c.coords()[0], c.coords()[1], c.coords()[2], c.coords()[3]];
                    points.push((c, sl.rho.values[n], h * h * dt));
                }
            }
        }
    }
    let total: f64 = points.iter().map(|p| p.2).sum();

    let dist = |a: &[f64; 4], ra: f64, b: &[f64; 4], rb: f64| {
        ((ra - rb).powi(2) + a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).sqrt()
    };
    let mut leaders: Vec<([f64; 4], f64)> = Vec::new();
    for (c, r, _) in &points {
        if leaders.len() < MAX_CLUSTERS && !leaders.iter().any(|(l, lr)| dist(l, *lr, c, *r) <= tol) {
            leaders.push((*c, *r));
        }
    }
    let assign = |leaders: &[([f64; 4], f64)]| -> Vec<Option<usize>> {
        points
            .iter()
            .map(|(c, r, _)| {
                leaders
                    .iter()
                    .enumerate()
                    .map(|(i, (l, lr))| (i, dist(l, *lr, c, *r)))
                    .filter(|(_, d)| *d <= tol)
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(i, _)| i)
            })
            .collect()
    };
    let mut owner = assign(&leaders);
    for _ in 0..2 {
        let mut acc = vec![([0.0; 4], 0.0, 0.0); leaders.len()];
        for (p, o) in points.iter().zip(&owner) {
            if let Some(i) = o {
                for k in 0..4 {
                    acc[*i].0[k] += p.2 * p.0[k];
                }
                acc[*i].1 += p.2 * p.1;
                acc[*i].2 += p.2;
            }
        }
        leaders = acc
            .iter()
            .zip(&leaders)
            .map(|((c, r, w), old)| if *w > 0.0 { (c.map(|x| x / w), r / w) } else { *old })
            .collect();
        owner = assign(&leaders);
    }
    let mut mass = vec![0.0; leaders.len()];
    for (p, o) in points.iter().zip(&owner) {
        if let Some(i) = o {
            mass[*i] += p.2;
        }
    }
    let mut clusters: Vec<Cluster> = leaders
        .iter()
        .zip(&mass)
        .filter(|(_, &m)| m > 0.0)
        .map(|((c, r), m)| Cluster { rho: *r, representative: *c, fraction: m / total })
        .collect();
    clusters.sort_by(|a, b| b.fraction.total_cmp(&a.fraction));
    let significant = clusters.iter().filter(|c| c.fraction >= SIGNIFICANT_FRACTION).count();
    let captured: f64 = clusters[..significant].iter().map(|c| c.fraction).sum();

    let (reference_weights, matched_fractions, tv_distance) = match state.base.constraint(label).map(|c| &c.set) {
        Some(ConstraintSet::Finite { decomposition }) => {
            let mut matched = vec![0.0; decomposition.vertices.len()];
            for c in &clusters[..significant] {
                let nearest = decomposition
                    .vertices
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (i, v.coords().iter().zip(&c.representative).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()))
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                if let Some((i, d2)) = nearest {
                    if d2.sqrt() <= tol {
                        matched[i] += c.fraction;
                    }
                }
            }
            let unmatched = 1.0 - matched.iter().sum::<f64>();
            let tv = 0.5
                * (matched.iter().zip(&decomposition.weights).map(|(f, mu)| (f - mu).abs()).sum::<f64>()
                    + unmatched.max(0.0));
            (Some(decomposition.weights.clone()), Some(matched), Some(tv))
        }
        _ => (None, None, None),
    };

    Census {
        label,
        tol,
        clusters,
        significant,
        off_cluster: 1.0 - captured,
        reference_weights,
        matched_fractions,
        tv_distance,
    }
}

/// `10^-2` times the largest state norm of the region's constraint set, the
/// default clustering tolerance.
pub fn default_tolerance(state: &StagedState, label: u32) -> f64 {
    let amplitude = match state.base.constraint(label) {
        Some(c) => (2.0 * c.rho * c.q + 2.0 * c.q * c.q).sqrt(),
        None => 0.0,
    };
    1e-2 * amplitude.max(f64::MIN_POSITIVE)
}
