//! Smoothed square profiles `h0` with mean zero and their six periodic
//! antiderivatives `h1, ..., h6`.

use wildflow::profiles::ProfileTower;

fn main() -> wildflow::Result<()> {
    for mu1 in [0.5, 0.25, 0.1] {
        let tower = ProfileTower::new(mu1, 0.02 * mu1.min(1.0 - mu1))?;
        let h0: Vec<String> = [0.0, 0.2, 0.5, 0.8].iter().map(|&s| format!("{:+.3}", tower.eval_derivatives(s)[6])).collect();
        let h6: Vec<String> = [0.0, 0.2, 0.5, 0.8].iter().map(|&s| format!("{:+.2e}", tower.eval_derivatives(s)[0])).collect();
        println!("mu1 = {mu1}");
        println!("  h0 at s = 0, .2, .5, .8: {}", h0.join(" "));
        println!("  h6 at the same phases:   {}", h6.join(" "));
        println!("  sup |h6|, ..., sup |h0|, sup |h0'|: {:?}", tower.derivative_sups().map(|v| (v * 1e3).round() / 1e3));
    }
    Ok(())
}
