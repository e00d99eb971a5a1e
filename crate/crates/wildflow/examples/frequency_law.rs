//! The oscillation frequency controls the distance of the wave values from
//! the segment `[w1, w2]` like `C / lambda`.

use wildflow::geometry::StatePoint;
use wildflow::profiles::PlateauCutoff;
use wildflow::waves::{random_points, sampled_sup_distance, Correction, LambdaRule, WaveAtom, WaveOptions};

fn main() -> wildflow::Result<()> {
    let jump = StatePoint::planar([0.6, 0.8], 0.48, 0.14);
    let cube = PlateauCutoff::new(vec![0.5; 3], vec![0.5; 3], 0.9)?;
    let opts = WaveOptions { correction: Correction::Full, rule: LambdaRule::Fixed, ..WaveOptions::default() };
    let base = WaveAtom::build(
        &StatePoint::zero(2),
        &jump.scale(-0.4),
        &jump.scale(0.6),
        cube,
        1.0,
        [[0.0, 1.0], [-1.0, 0.0]],
        50.0,
        &opts,
    )?;
    let pts = random_points(&base.cutoff, 4000, 5);
    let mut previous: Option<f64> = None;
    for k in 0..5 {
        let a = base.with_lambda(400.0 * 2f64.powi(k));
        let d = sampled_sup_distance(&a, &pts);
        let ratio = previous.map_or(String::new(), |p| format!("  ratio {:.3}", d / p));
        println!("lambda {:>6}: sup distance {d:.4e}  bound {:.4e}{ratio}", a.lambda, a.error_bound);
        previous = Some(d);
    }
    Ok(())
}
