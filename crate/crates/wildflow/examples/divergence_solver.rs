//! Symmetric trace-free right inverse of the divergence on the torus.

use std::f64::consts::PI;

use wildflow::operators::{r_torus, random_band_limited, DeviatorField, TorusGrid, VectorField};

fn main() -> wildflow::Result<()> {
    let grid = TorusGrid::new(128, 2.0 * PI)?;

    // f = (cos x1, 0) has R f = diag(sin x1, -sin x1).
    let f = VectorField::from_fn(grid, |x| [x[0].cos(), 0.0]);
    let (r, _) = r_torus(&f);
    let exact = DeviatorField { grid, r11: grid.sample(|x| x[0].sin()).values, r12: vec![0.0; grid.nodes()] };
    println!("closed form: max |R f - exact| = {:.2e}", r.max_distance(&exact));

    for seed in 0..3 {
        let f = VectorField {
            grid,
            components: [random_band_limited(grid, 12, 2 * seed).values, random_band_limited(grid, 12, 2 * seed + 1).values],
        };
        let (r, unresolved) = r_torus(&f);
        let div = r.divergence();
        let mut err: f64 = 0.0;
        for c in 0..2 {
            for (a, b) in div.components[c].iter().zip(&f.components[c]) {
                err = err.max((a - (b - unresolved.mean[c])).abs());
            }
        }
        println!("random field {seed}: |div R f - (f - mean f)| / |f| = {:.2e}", err / f.sup_norm());
    }
    Ok(())
}
