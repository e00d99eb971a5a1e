//! A localized plane wave with its source corrector: the linear system holds
//! pointwise, and dropping the corrector breaks it.

use wildflow::geometry::StatePoint;
use wildflow::profiles::PlateauCutoff;
use wildflow::waves::{random_points, wave_residual, Correction, LambdaRule, WaveAtom, WaveOptions};

const J: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];
const MINUS_I: [[f64; 2]; 2] = [[-1.0, 0.0], [0.0, -1.0]];

fn atom(source: [[f64; 2]; 2], correction: Correction) -> wildflow::Result<WaveAtom> {
    let jump = StatePoint::planar([0.6, 0.8], 0.48, 0.14);
    let cube = PlateauCutoff::new(vec![0.5; 3], vec![0.5; 3], 0.9)?;
    let opts = WaveOptions { correction, rule: LambdaRule::Fixed, ..WaveOptions::default() };
    WaveAtom::build(&StatePoint::zero(2), &jump.scale(-0.4), &jump.scale(0.6), cube, 1.0, source, 40.0, &opts)
}

fn main() -> wildflow::Result<()> {
    for (name, source) in [("B = 0", [[0.0; 2]; 2]), ("B = J", J), ("B = -I", MINUS_I)] {
        let a = atom(source, Correction::Full)?;
        let pts = random_points(&a.cutoff, 1000, 7);
        let r = wave_residual(&a, &pts, &[]);
        println!(
            "{name:<7} |div n| = {:.1e}  |d_t n + div V - B n| = {:.1e}  (amplitude {:.2})",
            r.divergence,
            r.momentum,
            a.amplitude()
        );
    }
    let pts = random_points(&atom(J, Correction::Full)?.cutoff, 1000, 7);
    let full = wave_residual(&atom(J, Correction::Full)?, &pts, &[]).momentum;
    let bare = wave_residual(&atom(J, Correction::WithoutCorrector)?, &pts, &[]).momentum;
    println!("\nwithout the corrector the momentum residual grows by a factor {:.1e}", bare / full.max(f64::MIN_POSITIVE));
    Ok(())
}
