//! The energy level `chi(t)` of the relaxing ansatz exists only for small
//! perturbations of the density.

use wildflow::ansatz::{solve_chi, ChiParams};

fn main() {
    for eps in [1e-3, 1e-2, 1e-1, 1.0] {
        match solve_chi(ChiParams::general_source(1.0, eps, 10.0, 0.1)) {
            Ok(c) => println!(
                "eps = {eps:<6} feasible on [0, 1]: chi(0.5) = {:.4e}, min margin {:.3e}, monotone {}",
                c.eval(0.5).0,
                c.min_margin,
                c.monotone
            ),
            Err(e) => println!("eps = {eps:<6} {e}"),
        }
    }
}
