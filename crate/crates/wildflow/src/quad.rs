//! Gauss-Legendre rules and composite Newton-Cotes weights.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    cache.lock().unwrap().insert(n, (x.clone(), w.clone()));
    (x, w)
}

/// Integrate `f` over `[a, b]` with the `n`-point rule.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    x.iter().zip(&w).map(|(xi, wi)| wi * f(m + h * xi)).sum::<f64>() * h
}

/// Composite weights for `count` equally spaced samples with spacing `h`:
/// Boole when the interval count is a multiple of 4, Simpson when even,
/// trapezoid otherwise.
pub fn uniform_weights(count: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; count];
    if count == 1 {
        return w;
    }
    let intervals = count - 1;
    if intervals % 4 == 0 {
        let base = [7.0, 32.0, 12.0, 32.0, 7.0];
        for blk in 0..intervals / 4 {
            for (k, b) in base.iter().enumerate() {
                w[4 * blk + k] += b * 2.0 * h / 45.0;
            }
        }
    } else if intervals % 2 == 0 {
        for blk in 0..intervals / 2 {
            w[2 * blk] += h / 3.0;
            w[2 * blk + 1] += 4.0 * h / 3.0;
            w[2 * blk + 2] += h / 3.0;
        }
    } else {
        for k in 0..intervals {
            w[k] += 0.5 * h;
            w[k + 1] += 0.5 * h;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_high_degree() {
        let n = 14;
        let v = integrate(|x| x.powi(26) + x.powi(3), -1.0, 1.0, n);
        assert!((v - 2.0 / 27.0).abs() < 1e-15);
        let (_, w) = gauss_legendre(24);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn composite_weights_integrate_polynomials() {
        for count in [9usize, 7, 6] {
            let h = 1.0 / (count - 1) as f64;
            let w = uniform_weights(count, h);
            let v: f64 = (0..count).map(|i| w[i] * (i as f64 * h).powi(2)).sum();
            let tol = if (count - 1) % 2 == 0 { 1e-14 } else { 1e-2 };
            assert!((v - 1.0 / 3.0).abs() < tol, "count {count}: {v}");
        }
    }
}
