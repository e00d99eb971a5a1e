//! Six stages of the convex integration on the two-region state, then a
//! census of the values taken in the box.

use wildflow::ansatz::{build_piecewise_constant, BoxRegion, PressureLaw, RegionDensity, SourceMatrix, TimeGrid};
use wildflow::operators::TorusGrid;
use wildflow::scheme::{default_tolerance, iterate, state_census, IterationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let density = RegionDensity {
        background: 2.0,
        background_slope: [0.0; 2],
        regions: vec![BoxRegion { lo: [0.25, 0.25], hi: [0.75, 0.75], rho: 1.0, slope: [0.0; 2] }],
    };
    let base = build_piecewise_constant(
        TorusGrid::new(32, 1.0)?,
        TimeGrid { t_end: 0.5, slices: 8 },
        &density,
        2.0,
        PressureLaw::new(0.5, 2.0)?,
        SourceMatrix::ROTATION,
        3,
    )?;
    let cfg = IterationConfig { max_stages: 6, ..IterationConfig::default() };
    let (state, reports) = iterate(base, &cfg, 7)?;

    println!("stage  dist          bound         |w|^2     cubes      lambda median");
    for r in &reports {
        println!(
            "{:>5}  {:.4e}  {:.4e}  {:.5}  {:.3e}  {:.2e}",
            r.stage, r.dist_integral, r.schedule_bound, r.l2_norm, r.cube_count, r.lambda_median
        );
    }
    let census = state_census(&state, 1, default_tolerance(&state, 1));
    println!("\n{} clusters in the box, total-variation distance to the decomposition weights {:.4}", census.significant, census.tv_distance.unwrap_or(f64::NAN));
    for c in census.clusters.iter().take(census.significant) {
        println!("  {:.3} of the box near (m, U) = {:.3?}", c.fraction, c.representative);
    }
    Ok(())
}
