//! The matrix inequality `rho q I + rho U - m (x) m >= 0` against a linear
//! program over sampled points of `K`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wildflow::geometry::{hull_margin, hull_membership_lp, ConstraintParams, StatePoint};

fn main() -> wildflow::Result<()> {
    let p = ConstraintParams::new(1.0, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut agree, mut skipped, mut inside) = (0, 0, 0);
    for i in 0..500 {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.8..0.8)).collect();
        let w = StatePoint::from_coords(2, &c)?;
        let margin = hull_margin(&w, &p);
        if margin.abs() <= 1e-6 {
            skipped += 1;
            continue;
        }
        let lp = hull_membership_lp(&w, &p, 100, i);
        if lp.inside == (margin > 0.0) {
            agree += 1;
        }
        inside += usize::from(margin > 0.0);
    }
    println!("{agree} of {} decided points agree ({inside} inside, {skipped} on the boundary band)", 500 - skipped);
    Ok(())
}
