//! Carathéodory decomposition of interior states into extreme points of `K`.
//!
//! Run with `cargo run --example extreme_points`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wildflow::geometry::{hull_margin, select_extreme_points, simplex_size, state_dim, ConstraintParams, StatePoint};

fn main() -> wildflow::Result<()> {
    let p = ConstraintParams::new(1.5, 0.4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    for n in [2, 3] {
        let d = state_dim(n);
        let mut worst: f64 = f64::INFINITY;
        let mut tried = 0;
        while tried < 20 {
            let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.3..0.3)).collect();
            let w = StatePoint::from_coords(n, &c)?;
            if hull_margin(&w, &p) <= 0.0 {
                continue;
            }
            let dec = select_extreme_points(&w, &p, tried as u64)?;
            assert_eq!(dec.vertices.len(), simplex_size(n));
            worst = worst.min(dec.slack);
            tried += 1;
        }
        println!("n = {n}: {} extreme points per state, smallest LP slack over 20 targets {worst:.4e}", simplex_size(n));
    }

    let dec = select_extreme_points(&StatePoint::zero(2), &p, 0)?;
    println!("\ndecomposition of the origin:");
    for (v, mu) in dec.vertices.iter().zip(&dec.weights) {
        println!("  mu = {mu:.4}  (m, U) = {:.4?}", v.coords());
    }
    Ok(())
}
