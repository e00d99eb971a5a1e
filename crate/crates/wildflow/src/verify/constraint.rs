use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::Slice;
use crate::geometry::dist_to_k_planar;
use crate::operators::ScalarField;

/// Nodal constraint diagnostics of one slice.
#[derive(Debug, Clone)]
pub struct ConstraintSlice {
    pub time: f64,
    /// `dist((m, U), K_{rho, q})`.
    pub dist: ScalarField,
    /// `lambda_min(rho q I + rho U - m (x) m)`; nonnegative inside the hull.
    pub margin: ScalarField,
    /// `| |m|^2 - n rho q |`, zero on the constraint set.
    pub saturation: ScalarField,
    pub summary: ConstraintSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSummary {
    pub time: f64,
    pub max_dist: f64,
    pub mean_dist: f64,
    /// Area fraction where `dist > threshold`.
    pub measure_above: f64,
    pub threshold: f64,
    pub min_margin: f64,
    pub max_saturation: f64,
}

fn node_values(s: &Slice, k: usize) -> (f64, f64, f64) {
    let (rho, q) = s.params_at(k);
    let w = s.state_at(k);
    let c = w.coords();
    let dist = if q > 0.0 { dist_to_k_planar(&[c[0], c[1], c[2], c[3]], rho, q) } else { w.norm() };
    let m2 = c[0] * c[0] + c[1] * c[1];
    (dist, s.margin_at(k), (m2 - 2.0 * rho * q).abs())
}

/// Distance to `K_{rho, q}`, hull margin and saturation on every slice.
pub fn constraint_field(slices: &[Slice], threshold: f64) -> Vec<ConstraintSlice> {
    slices
        .par_iter()
        .map(|s| {
            let grid = s.grid();
            let v: Vec<(f64, f64, f64)> = (0..grid.nodes()).map(|k| node_values(s, k)).collect();
            let field = |f: fn(&(f64, f64, f64)) -> f64| ScalarField { grid, values: v.iter().map(f).collect() };
            let (dist, margin, saturation) = (field(|x| x.0), field(|x| x.1), field(|x| x.2));
            let n = grid.nodes() as f64;
            let summary = ConstraintSummary {
                time: s.time,
                max_dist: dist.values.iter().cloned().fold(0.0, f64::max),
                mean_dist: dist.values.iter().sum::<f64>() / n,
                measure_above: dist.values.iter().filter(|d| **d > threshold).count() as f64 / n,
                threshold,
                min_margin: margin.values.iter().cloned().fold(f64::INFINITY, f64::min),
                max_saturation: saturation.values.iter().cloned().fold(0.0, f64::max),
            };
            ConstraintSlice { time: s.time, dist, margin, saturation, summary }
        })
        .collect()
}
