//! Every neighbourhood of a point of `K` affinely spans the whole state space.

use wildflow::geometry::{sample_affine_rank, sample_extreme_neighborhood, state_dim, ConstraintParams};

fn main() -> wildflow::Result<()> {
    for n in [2, 3] {
        let p = ConstraintParams::new(1.0, 1.0 / n as f64)?;
        let mut xi0 = vec![0.0; n];
        xi0[0] = 1.0;
        for delta in [0.3, 0.1, 0.03] {
            let pts = sample_extreme_neighborhood(&p, &xi0, delta, 1000, 7);
            let rank = sample_affine_rank(&pts, 1e-9);
            println!("n = {n}, radius {delta:<5} -> affine rank {rank} (state dimension {})", state_dim(n));
        }
    }
    Ok(())
}
