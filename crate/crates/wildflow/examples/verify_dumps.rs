//! Verification from files alone: dump a state, read it back, evaluate the
//! weak formulation and the energy inequality, then corrupt the momentum.

use wildflow::ansatz::{build_piecewise_constant, read_slices, BoxRegion, PressureLaw, RegionDensity, SourceMatrix, TimeGrid};
use wildflow::operators::TorusGrid;
use wildflow::verify::{add_momentum_blob, verify_dumps, verify_slices, VerifyConfig};

fn main() -> wildflow::Result<()> {
    let density = RegionDensity {
        background: 2.0,
        background_slope: [0.0; 2],
        regions: vec![BoxRegion { lo: [0.25, 0.25], hi: [0.75, 0.75], rho: 1.0, slope: [0.0; 2] }],
    };
    let plaw = PressureLaw::new(0.5, 2.0)?;
    let state = build_piecewise_constant(
        TorusGrid::new(32, 1.0)?,
        TimeGrid { t_end: 0.5, slices: 8 },
        &density,
        2.0,
        plaw,
        SourceMatrix::ROTATION,
        3,
    )?;
    let dir = std::env::temp_dir().join("wildflow-verify-example");
    state.write_slices(&dir)?;
    drop(state);

    let cfg = VerifyConfig::default();
    let report = verify_dumps(&dir, &plaw, &SourceMatrix::ROTATION, &cfg, None)?;
    println!("clean dumps: pass {}", report.pass);
    for a in report.admissibility.iter().take(4) {
        println!("  energy inequality {:<22} {:+.2e} (tolerance {:.1e})", a.test, a.value, a.tolerance);
    }

    let mut slices = read_slices(&dir)?;
    add_momentum_blob(&mut slices, [0.5, 0.5], 0.2, [0.1, 0.0]);
    let corrupted = verify_slices(&slices, &plaw, &SourceMatrix::ROTATION, &cfg, None)?;
    let worst = corrupted.weak.iter().map(|w| w.normalized[1]).fold(0.0, f64::max);
    println!("with a momentum blob: pass {}, worst normalized momentum residual {worst:.2e}", corrupted.pass);
    Ok(())
}
