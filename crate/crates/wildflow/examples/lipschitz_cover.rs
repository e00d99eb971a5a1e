//! Piecewise-Lipschitz densities: a dyadic Whitney-type cover by squares on
//! which the density is nearly constant, then the cube-wise ansatz.

use wildflow::ansatz::{build_piecewise_lipschitz, dyadic_cover, BoxRegion, LipschitzOptions, PressureLaw, RegionDensity, SourceMatrix};
use wildflow::operators::TorusGrid;

fn main() -> wildflow::Result<()> {
    let density = RegionDensity {
        background: 2.0,
        background_slope: [0.1, -0.05],
        regions: vec![BoxRegion { lo: [0.25, 0.25], hi: [0.75, 0.75], rho: 1.0, slope: [0.2, 0.1] }],
    };
    let grid = TorusGrid::new(64, 1.0)?;
    let opts = LipschitzOptions { slices: Some(12), ..LipschitzOptions::default() };

    let cubes = dyadic_cover(&density, &grid, opts.theta, opts.min_cells)?;
    let mut sizes: Vec<usize> = cubes.iter().map(|c| c.cells).collect();
    sizes.sort_unstable();
    sizes.dedup();
    println!("{} cubes with side lengths {:?} cells", cubes.len(), sizes);

    let state = build_piecewise_lipschitz(&density, grid, PressureLaw::new(0.5, 2.0)?, SourceMatrix::ROTATION, &opts, 1)?;
    let d = &state.diagnostics;
    println!("face flux {:.2e}, continuity residual {:.2e}, min margin {:.3}", d.face_flux.unwrap_or(0.0), d.continuity_residual, d.min_margin);
    for note in &d.notes {
        println!("note: {note}");
    }
    Ok(())
}
