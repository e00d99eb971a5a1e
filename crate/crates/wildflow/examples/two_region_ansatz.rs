//! The piecewise-constant subsolution: a denser background around a box,
//! each region strictly inside the hull of its constraint set.

use wildflow::ansatz::{build_piecewise_constant, BoxRegion, ConstraintSet, PressureLaw, RegionDensity, SourceMatrix, TimeGrid};
use wildflow::operators::TorusGrid;

fn main() -> wildflow::Result<()> {
    let density = RegionDensity {
        background: 2.0,
        background_slope: [0.0; 2],
        regions: vec![BoxRegion { lo: [0.25, 0.25], hi: [0.75, 0.75], rho: 1.0, slope: [0.0; 2] }],
    };
    let state = build_piecewise_constant(
        TorusGrid::new(64, 1.0)?,
        TimeGrid { t_end: 0.5, slices: 8 },
        &density,
        2.0,
        PressureLaw::new(0.5, 2.0)?,
        SourceMatrix::ROTATION,
        3,
    )?;

    for c in &state.constraints {
        print!("region {}: rho = {}, q = {:.4}", c.label, c.rho, c.q);
        match &c.set {
            ConstraintSet::Finite { decomposition } => {
                println!(", {} states with weights {:.3?}", decomposition.vertices.len(), decomposition.weights)
            }
            _ => println!(", inert"),
        }
    }
    println!("strict on labels {:?}, minimum hull margin {:.3}", state.strict.labels, state.diagnostics.min_margin);

    let dir = std::env::temp_dir().join("wildflow-two-region");
    state.write_slices(&dir)?;
    println!("slices written to {}", dir.display());
    Ok(())
}
