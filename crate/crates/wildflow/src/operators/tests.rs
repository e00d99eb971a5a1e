use std::f64::consts::PI;

use super::*;

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n, 2.0 * PI).unwrap()
}

fn random_vector(g: TorusGrid, seed: u64) -> VectorField {
    let a = random_band_limited(g, 12, seed);
    let b = random_band_limited(g, 12, seed + 1000);
    VectorField { grid: g, components: [a.values, b.values] }
}

#[test]
fn grid_validation() {
    assert!(TorusGrid::new(8, 1.0).is_err());
    assert!(TorusGrid::new(48, 1.0).is_err());
    assert!(TorusGrid::new(32, 0.0).is_err());
}

#[test]
fn poisson_single_mode_and_constant() {
    let l = 3.0;
    let g = TorusGrid::new(32, l).unwrap();
    let k = 2.0 * PI / l;
    let f = g.sample(|x| (k * x[0]).cos() + 5.0);
    let sol = poisson_solve(&f, false);
    assert!((sol.removed_mean - 5.0).abs() < 1e-12);
    let exact = g.sample(|x| -(k * x[0]).cos() / (k * k));
    let err = sol.psi.values.iter().zip(&exact.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-13, "{err}");
    let c = poisson_solve(&g.sample(|_| 2.5), false);
    assert!(c.psi.sup_norm() < 1e-15);
}

#[test]
fn poisson_random_round_trip() {
    let g = grid(64);
    let mut f = random_band_limited(g, 31, 3);
    f.values.iter_mut().enumerate().for_each(|(i, v)| *v += ((i * 7919) % 13) as f64 * 0.01);
    let sol = poisson_solve(&f, false);
    let lap = sol.psi.laplacian();
    let err = lap.values.iter().zip(&f.values).fold(0.0f64, |m, (a, b)| m.max((a - (b - sol.removed_mean)).abs()));
    assert!(err <= 1e-10 * f.sup_norm(), "{err}");
    assert!(sol.psi.mean().abs() < 1e-12);
}

#[test]
fn r_torus_closed_form() {
    let g = grid(64);
    let f = VectorField::from_fn(g, |x| [x[0].cos(), 0.0]);
    let (r, un) = r_torus(&f);
    let exact = DeviatorField { grid: g, r11: g.sample(|x| x[0].sin()).values, r12: vec![0.0; g.nodes()] };
    assert!(r.max_distance(&exact) < 1e-12);
    assert!(un.nyquist_sup < 1e-12 && un.mean[0].abs() < 1e-12);
    let (z, _) = r_torus(&VectorField::zeros(g));
    assert_eq!(z.sup_norm(), 0.0);
}

#[test]
fn r_torus_inverts_divergence() {
    let g = grid(128);
    for seed in 0..3 {
        let f = random_vector(g, seed);
        let (r, un) = r_torus(&f);
        let div = r.divergence();
        let mut err: f64 = 0.0;
        for c in 0..2 {
            for (a, b) in div.components[c].iter().zip(&f.components[c]) {
                err = err.max((a - (b - un.mean[c])).abs());
            }
        }
        assert!(err <= 1e-10 * f.sup_norm(), "{err}");
    }
}

#[test]
fn r_torus_reports_nyquist_content() {
    let g = grid(32);
    let f = VectorField::from_fn(g, |x| [(16.0 * x[0]).cos(), 0.0]);
    let (r, un) = r_torus(&f);
    assert!(r.sup_norm() < 1e-14);
    assert!((un.nyquist_sup - 1.0).abs() < 1e-12);
}

#[test]
fn r_torus_is_linear_and_translation_equivariant() {
    let g = grid(64);
    let f = random_vector(g, 11);
    let h = random_vector(g, 12);
    let combo = VectorField::linear_combination(2.0, &f, -0.5, &h).unwrap();
    let (rf, _) = r_torus(&f);
    let (rh, _) = r_torus(&h);
    let (rc, _) = r_torus(&combo);
    let mut err: f64 = 0.0;
    for k in 0..g.nodes() {
        err = err.max((rc.r11[k] - 2.0 * rf.r11[k] + 0.5 * rh.r11[k]).abs());
        err = err.max((rc.r12[k] - 2.0 * rf.r12[k] + 0.5 * rh.r12[k]).abs());
    }
    assert!(err < 1e-12 * (1.0 + rc.sup_norm()));
    let n = g.resolution;
    let shift = |v: &[f64]| (0..g.nodes()).map(|k| v[((k / n + 5) % n) * n + (k % n + 3) % n]).collect::<Vec<_>>();
    let fs = VectorField { grid: g, components: [shift(&f.components[0]), shift(&f.components[1])] };
    let (rs, _) = r_torus(&fs);
    let moved = DeviatorField { grid: g, r11: shift(&rf.r11), r12: shift(&rf.r12) };
    assert!(rs.max_distance(&moved) < 1e-10);
}

#[test]
fn leray_projection_properties() {
    let g = grid(64);
    let phi = random_band_limited(g, 10, 5);
    let grad = phi.gradient();
    let p = leray_project(&grad);
    assert!(p.sup_norm() < 1e-10 * grad.sup_norm());
    let v = random_vector(g, 8);
    let once = leray_project(&v);
    let twice = leray_project(&once);
    assert!(once.divergence().sup_norm() <= 1e-10 * v.sup_norm());
    assert!(twice.sub(&once).unwrap().sup_norm() <= 1e-10 * v.sup_norm());
    let mean = v.mean();
    let pm = once.mean();
    assert!((mean[0] - pm[0]).abs() < 1e-12 && (mean[1] - pm[1]).abs() < 1e-12);
}

#[test]
fn spectral_convergence_on_analytic_field() {
    let errs: Vec<f64> = [16, 32]
        .iter()
        .map(|&n| {
            let g = grid(n);
            let f = VectorField::from_fn(g, |x| [(x[0].sin() + x[1].cos()).exp(), (x[0].cos()).exp()]);
            let (r, un) = r_torus(&f);
            let div = r.divergence();
            let mut e: f64 = 0.0;
            for c in 0..2 {
                for (a, b) in div.components[c].iter().zip(&f.components[c]) {
                    e = e.max((a - (b - un.mean[c])).abs());
                }
            }
            e
        })
        .collect();
    assert!(errs[0] / errs[1].max(1e-300) > 100.0, "{errs:?}");
}

#[test]
fn padded_operator_reports_periodization() {
    let g = grid(32);
    let bump = |x: [f64; 2]| {
        let r2 = (x[0] - PI).powi(2) + (x[1] - PI).powi(2);
        if r2 < 1.0 {
            (1.0 - r2).powi(4)
        } else {
            0.0
        }
    };
    let f = VectorField::from_fn(g, |x| [bump(x), 0.0]);
    let (r, rep) = r_padded(&f, 4).unwrap();
    assert_eq!(rep.pad, 4);
    assert!(rep.removed_mean[0] > 0.0);
    assert!(rep.residual > 0.0 && rep.residual < 0.2);
    assert!(r.sup_norm().is_finite());
}

#[test]
fn neumann_cosine_mode() {
    let r = 0.7;
    let cg = CubeGrid::new([0.0, 0.0], r, 32).unwrap();
    let f = cg.sample(|x| (PI * x[0] / r).cos());
    let sol = neumann_poisson_cube(&f, &cg).unwrap();
    let exact = cg.sample(|x| -(r / PI).powi(2) * (PI * x[0] / r).cos());
    let err = sol.psi.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-13, "{err}");
    let z = neumann_poisson_cube(&vec![0.0; 33 * 33], &cg).unwrap();
    assert_eq!(z.psi.iter().fold(0.0f64, |m, v| m.max(v.abs())), 0.0);
}

#[test]
fn neumann_random_data() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let cg = CubeGrid::new([1.0, -2.0], 0.5, 64).unwrap();
    let f: Vec<f64> = (0..65 * 65).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let sol = neumann_poisson_cube(&f, &cg).unwrap();
    assert!(sol.residual <= 1e-8);
    assert!(sol.face_derivative <= 1e-8 * sol.grad_sup());
    assert!(sol.boundary_flux().abs() <= 1e-8);
    let w = cg.weights();
    let mean: f64 = sol.psi.iter().zip(&w).map(|(p, w)| p * w).sum::<f64>() / 0.25;
    assert!(mean.abs() < 1e-10, "{mean}");
}

#[test]
fn dump_round_trip() {
    let g = TorusGrid::new(16, 1.5).unwrap();
    let v = VectorField::from_fn(g, |x| [x[0], -x[1]]);
    let d = FieldDump::vector(&v, 0.25, "velocity");
    let dir = std::env::temp_dir().join(format!("wildflow-dump-{}", std::process::id()));
    let path = d.write(&dir).unwrap();
    let back = FieldDump::read(&path).unwrap();
    assert_eq!(back, d);
    assert_eq!(back.component(1), v.components[1]);
    assert_eq!(back.grid().unwrap(), g);
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("velocity.json")).unwrap()).unwrap();
    for key in ["resolution", "length", "components", "time", "name"] {
        assert!(side.get(key).is_some());
    }
    std::fs::remove_dir_all(dir).ok();
}
