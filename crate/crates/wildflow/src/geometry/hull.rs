use nalgebra::Matrix3;

use super::state::{ConstraintParams, StatePoint};

/// Unit vector for angle parameters: one angle for `n = 2`, polar/azimuth for `n = 3`.
pub fn direction(n: usize, angles: &[f64]) -> [f64; 3] {
    if n == 2 {
        [angles[0].cos(), angles[0].sin(), 0.0]
    } else {
        let (t, p) = (angles[0], angles[1]);
        [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
    }
}

/// Extreme point `(sqrt(n rho q) xi, n q xi (x) xi - q I)` of the constraint set.
pub fn k_point(p: &ConstraintParams, xi: &[f64]) -> StatePoint {
    let n = xi.len();
    let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    let e: Vec<f64> = xi.iter().map(|x| x / norm).collect();
    let a = p.momentum_radius(n);
    let nq = n as f64 * p.q;
    let m: Vec<f64> = e.iter().map(|x| a * x).collect();
    let mut u = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            u[i][j] = nq * e[i] * e[j] - if i == j { p.q } else { 0.0 };
        }
    }
    StatePoint::from_parts_unchecked(n, &m, &u)
}

fn min_eig_sym(n: usize, a: &[[f64; 3]; 3]) -> f64 {
    if n == 2 {
        let tr = a[0][0] + a[1][1];
        let d = ((a[0][0] - a[1][1]) * 0.5).hypot(a[0][1]);
        0.5 * tr - d
    } else {
        let m = Matrix3::from_fn(|i, j| a[i][j]);
        m.symmetric_eigenvalues().min()
    }
}

fn max_eig_sym(n: usize, a: &[[f64; 3]; 3]) -> f64 {
    let mut neg = *a;
    neg.iter_mut().flatten().for_each(|x| *x = -*x);
    -min_eig_sym(n, &neg)
}

/// Smallest eigenvalue of `rho q I + rho U - m (x) m`; positive exactly on the
/// interior of the convex hull of `K_{rho,q}`.
pub fn hull_margin(w: &StatePoint, p: &ConstraintParams) -> f64 {
    let n = w.dim();
    let m = w.m();
    let u = w.u_matrix();
    let mut a = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = p.rho * u[i][j] - m[i] * m[j] + if i == j { p.rho * p.q } else { 0.0 };
        }
    }
    min_eig_sym(n, &a)
}

/// Generalized energy `(n/2) lambda_max(m (x) m / rho - U)`.
pub fn generalized_energy(w: &StatePoint, rho: f64) -> f64 {
    let n = w.dim();
    let m = w.m();
    let u = w.u_matrix();
    let mut a = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = m[i] * m[j] / rho - u[i][j];
        }
    }
    0.5 * n as f64 * max_eig_sym(n, &a)
}

/// Maximize a function of a unit vector. Returns the best value and direction.
///
/// A dense start grid followed by golden-section (`n = 2`) or tangent-plane
/// pattern search (`n = 3`) refinement of the most promising starts.
pub fn maximize_on_sphere(n: usize, f: impl Fn(&[f64; 3]) -> f64) -> (f64, [f64; 3]) {
    if n == 2 {
        let g = 192usize;
        let h = std::f64::consts::TAU / g as f64;
        let vals: Vec<f64> = (0..g).map(|k| f(&direction(2, &[k as f64 * h]))).collect();
        let mut starts: Vec<usize> = (0..g)
            .filter(|&k| vals[k] >= vals[(k + g - 1) % g] && vals[k] >= vals[(k + 1) % g])
            .collect();
        starts.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        starts.truncate(3);
        let mut best = (f64::NEG_INFINITY, [1.0, 0.0, 0.0]);
        for k in starts {
            let (v, a) = golden_max(|a| f(&direction(2, &[a])), k as f64 * h - h, k as f64 * h + h);
            if v > best.0 {
                best = (v, direction(2, &[a]));
            }
        }
        best
    } else {
        let g = 400usize;
        let pts: Vec<[f64; 3]> = fibonacci_sphere(g);
        let vals: Vec<f64> = pts.iter().map(&f).collect();
        let mut order: Vec<usize> = (0..g).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        let mut best = (f64::NEG_INFINITY, pts[0]);
        for &k in order.iter().take(4) {
            let (v, x) = pattern_max(&f, pts[k], vals[k]);
            if v > best.0 {
                best = (v, x);
            }
        }
        best
    }
}

pub(crate) fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    if f1 > f2 {
        (f1, x1)
    } else {
        (f2, x2)
    }
}

fn tangent_basis(x: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if x[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
    let mut e1 = [a[0] - d * x[0], a[1] - d * x[1], a[2] - d * x[2]];
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|v| *v /= n1);
    let e2 = [
        x[1] * e1[2] - x[2] * e1[1],
        x[2] * e1[0] - x[0] * e1[2],
        x[0] * e1[1] - x[1] * e1[0],
    ];
    (e1, e2)
}

fn pattern_max(f: &impl Fn(&[f64; 3]) -> f64, mut x: [f64; 3], mut fx: f64) -> (f64, [f64; 3]) {
    let mut step = 0.08;
    while step > 1e-11 {
        let (e1, e2) = tangent_basis(&x);
        let mut improved = false;
        for (e, s) in [(e1, 1.0), (e1, -1.0), (e2, 1.0), (e2, -1.0)] {
            let mut y = [0.0; 3];
            for i in 0..3 {
                y[i] = x[i] + s * step * e[i];
            }
            let ny = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
            y.iter_mut().for_each(|v| *v /= ny);
            let fy = f(&y);
            if fy > fx {
                x = y;
                fx = fy;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (fx, x)
}

/// Euclidean distance from `w` to `K_{rho,q}` together with the nearest direction.
pub fn dist_to_k_with_direction(w: &StatePoint, p: &ConstraintParams) -> (f64, [f64; 3]) {
    let n = w.dim();
    let c = w.coords();
    let (best, xi) = maximize_on_sphere(n, |xi| {
        let k = k_point(p, &xi[..n]);
        -k.coords().iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    });
    ((-best).max(0.0).sqrt(), xi)
}

pub fn dist_to_k(w: &StatePoint, p: &ConstraintParams) -> f64 {
    dist_to_k_with_direction(w, p).0
}

/// Planar fast path of [`dist_to_k`] working directly on isometric coordinates.
pub fn dist_to_k_planar(c: &[f64; 4], rho: f64, q: f64) -> f64 {
    let a = (2.0 * rho * q).sqrt();
    let b = std::f64::consts::SQRT_2 * q;
    let f = |t: f64| {
        let (s, co) = t.sin_cos();
        let (s2, c2) = (2.0 * t).sin_cos();
        -((c[0] - a * co).powi(2) + (c[1] - a * s).powi(2) + (c[2] - b * c2).powi(2) + (c[3] - b * s2).powi(2))
    };
    let g = 96usize;
    let h = std::f64::consts::TAU / g as f64;
    let vals: Vec<f64> = (0..g).map(|k| f(k as f64 * h)).collect();
    let mut best = f64::NEG_INFINITY;
    for k in 0..g {
        if vals[k] >= vals[(k + g - 1) % g] && vals[k] >= vals[(k + 1) % g] {
            let (v, _) = golden_max(f, k as f64 * h - h, k as f64 * h + h);
            best = best.max(v);
        }
    }
    (-best).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_point_oracle() {
        let p = ConstraintParams::new(2.0, 1.0).unwrap();
        let k = k_point(&p, &[1.0, 0.0]);
        assert!((k.m()[0] - 2.0).abs() < 1e-15 && k.m()[1].abs() < 1e-15);
        let u = k.u_matrix();
        assert!((u[0][0] - 1.0).abs() < 1e-15 && (u[1][1] + 1.0).abs() < 1e-15 && u[0][1].abs() < 1e-15);
    }

    #[test]
    fn margin_oracle() {
        let p = ConstraintParams::new(1.0, 0.5).unwrap();
        let w = StatePoint::planar([10.0, 0.0], 0.0, 0.0);
        assert!((hull_margin(&w, &p) + 99.5).abs() < 1e-12);
        let k = k_point(&p, &[0.6, 0.8]);
        assert!(hull_margin(&k, &p).abs() < 1e-12);
    }

    #[test]
    fn dist_at_center_oracle() {
        let p = ConstraintParams::new(1.0, 0.5).unwrap();
        let d = dist_to_k(&StatePoint::zero(2), &p);
        assert!((d - 1.5f64.sqrt()).abs() < 1e-12);
        let dp = dist_to_k_planar(&[0.0; 4], 1.0, 0.5);
        assert!((dp - 1.5f64.sqrt()).abs() < 1e-12);
        let k = k_point(&p, &[0.0, 1.0]);
        assert!(dist_to_k(&k, &p) < 1e-7);
    }

    #[test]
    fn extreme_points_have_energy_half_nq() {
        let p = ConstraintParams::new(1.7, 0.3).unwrap();
        let k = k_point(&p, &[0.6, -0.8]);
        assert!((generalized_energy(&k, p.rho) - 0.3).abs() < 1e-12);
        let k = k_point(&p, &[0.3, -0.5, 0.8]);
        assert!((generalized_energy(&k, p.rho) - 0.45).abs() < 1e-12);
    }

    #[test]
    fn sphere_search_finds_quadratic_maximum() {
        let (v, x) = maximize_on_sphere(3, |x| 2.0 * x[2] * x[2] + 0.5 * x[0]);
        assert!(v > 2.0 && x[2].abs() > 0.99);
    }
}
