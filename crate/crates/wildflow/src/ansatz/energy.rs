use super::pressure::{PressureLaw, SourceMatrix};
use super::state::SubsolutionState;
use crate::operators::{ScalarField, VectorField};

/// Energy `I(rho) + (n/2) q` in two space dimensions.
pub fn energy_density(plaw: &PressureLaw, rho: f64, q: f64) -> f64 {
    plaw.internal_energy(rho) + q
}

fn energy_fields(state: &SubsolutionState, plaw: &PressureLaw) -> Vec<ScalarField> {
    state
        .slices
        .iter()
        .map(|s| ScalarField {
            grid: s.grid(),
            values: s.rho.values.iter().zip(&s.q.values).map(|(&r, &q)| energy_density(plaw, r, q)).collect(),
        })
        .collect()
}

fn time_derivative(e: &[ScalarField], j: usize, dt: f64) -> Vec<f64> {
    let n = e.len();
    let nodes = e[0].values.len();
    if n < 2 {
        return vec![0.0; nodes];
    }
    let v = |k: usize, i: usize| e[k].values[i];
    (0..nodes)
        .map(|i| match (j, n) {
            (_, 2) => (v(1, i) - v(0, i)) / dt,
            (0, _) => (-3.0 * v(0, i) + 4.0 * v(1, i) - v(2, i)) / (2.0 * dt),
            (j, n) if j == n - 1 => (3.0 * v(j, i) - 4.0 * v(j - 1, i) + v(j - 2, i)) / (2.0 * dt),
            (j, _) => (v(j + 1, i) - v(j - 1, i)) / (2.0 * dt),
        })
        .collect()
}

/// Pointwise `d_t E + div((E + p) m / rho) + n beta q` on every slice.
///
/// The source work `m . B m / rho` of a saturated state is bounded below by
/// `-n beta q`, so a nonpositive value certifies the energy inequality for
/// every solution generated from the state.
pub fn energy_production(state: &SubsolutionState, plaw: &PressureLaw, source: &SourceMatrix) -> Vec<ScalarField> {
    let beta = source.beta();
    let energy = energy_fields(state, plaw);
    let dt = state.time.step();
    state
        .slices
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let grid = s.grid();
            let mut flux = VectorField::zeros(grid);
            for k in 0..grid.nodes() {
                let r = s.rho.values[k];
                let w = (energy[j].values[k] + plaw.p(r)) / r;
                flux.components[0][k] = w * s.m.components[0][k];
                flux.components[1][k] = w * s.m.components[1][k];
            }
            let div = flux.divergence();
            let de = time_derivative(&energy, j, dt);
            let values = (0..grid.nodes()).map(|k| de[k] + div.values[k] + 2.0 * beta * s.q.values[k]).collect();
            ScalarField { grid, values }
        })
        .collect()
}

/// Magnitude against which production values are judged: `sup (E + p)`.
pub fn production_scale(state: &SubsolutionState, plaw: &PressureLaw) -> f64 {
    state
        .slices
        .iter()
        .flat_map(|s| s.rho.values.iter().zip(&s.q.values))
        .map(|(&r, &q)| (energy_density(plaw, r, q) + plaw.p(r)).abs())
        .fold(0.0, f64::max)
}
