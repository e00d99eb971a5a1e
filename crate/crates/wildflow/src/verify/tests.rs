use std::f64::consts::PI;

use super::*;
use crate::ansatz::{
    build_perturbed_density, build_piecewise_constant, BoxRegion, DensityMode, ModalDensity, PerturbedOptions,
    PressureLaw, RegionDensity, SourceMatrix, SubsolutionState, TimeGrid,
};
use crate::error::Error;
use crate::geometry::dist_to_k_planar;
use crate::operators::{DeviatorField, ScalarField, TorusGrid, VectorField};

fn plaw() -> PressureLaw {
    PressureLaw::new(0.5, 2.0).unwrap()
}

fn two_region() -> SubsolutionState {
    let density = RegionDensity {
        background: 2.0,
        background_slope: [0.0; 2],
        regions: vec![BoxRegion { lo: [0.25, 0.25], hi: [0.75, 0.75], rho: 1.0, slope: [0.0; 2] }],
    };
    let grid = TorusGrid::new(32, 1.0).unwrap();
    build_piecewise_constant(grid, TimeGrid { t_end: 0.5, slices: 8 }, &density, 2.0, plaw(), SourceMatrix::ROTATION, 3)
        .unwrap()
}

fn perturbed(opts: &PerturbedOptions) -> SubsolutionState {
    let grid = TorusGrid::new(32, 2.0 * PI).unwrap();
    let rho0 = ModalDensity { mean: 1.0, modes: vec![DensityMode { k: [1, 0], amplitude: 1e-3, phase: 0.0 }] }.sample(&grid);
    build_perturbed_density(&rho0, plaw(), SourceMatrix::DAMPING, opts).unwrap()
}

fn constant_slices(rho: f64, q: f64, slices: usize) -> Vec<Slice> {
    let grid = TorusGrid::new(16, 1.0).unwrap();
    (0..=slices)
        .map(|j| Slice {
            time: j as f64 / slices as f64,
            rho: ScalarField { grid, values: vec![rho; grid.nodes()] },
            m: VectorField::zeros(grid),
            u: DeviatorField { grid, r11: vec![0.0; grid.nodes()], r12: vec![0.0; grid.nodes()] },
            q: ScalarField { grid, values: vec![q; grid.nodes()] },
        })
        .collect()
}

fn family(slices: &[Slice], nonnegative: bool) -> TestFunctionFamily {
    let cfg = VerifyConfig::default();
    let (l, t) = (slices[0].grid().length, slices.last().unwrap().time);
    if nonnegative {
        TestFunctionFamily::nonnegative(l, t, &cfg.modes).unwrap()
    } else {
        TestFunctionFamily::signed(l, t, &cfg.modes).unwrap()
    }
}

#[test]
fn family_has_twelve_smooth_members() {
    let fam = TestFunctionFamily::signed(1.0, 0.5, &VerifyConfig::default().modes).unwrap();
    assert_eq!(fam.len(), 12);
    let nonneg = TestFunctionFamily::nonnegative(1.0, 0.5, &VerifyConfig::default().modes).unwrap();
    assert!(nonneg.nonnegative && !fam.nonnegative);
    for f in &nonneg.members {
        for i in 0..50 {
            let x = [0.37 * i as f64 % 1.0, 0.61 * i as f64 % 1.0];
            assert!(f.spatial(x).0 >= 0.1 - 1e-12);
        }
        assert_eq!(f.temporal(0.46), [0.0, 0.0]);
    }
    for f in &fam.members {
        let h = 1e-6;
        let t = 0.3;
        let fd = (f.temporal(t + h)[0] - f.temporal(t - h)[0]) / (2.0 * h);
        assert!((fd - f.temporal(t)[1]).abs() < 1e-6 * f.c2_norm());
        let x = [0.3, 0.7];
        let g = f.spatial(x).1;
        let fx = (f.spatial([x[0] + h, x[1]]).0 - f.spatial([x[0] - h, x[1]]).0) / (2.0 * h);
        assert!((fx - g[0]).abs() < 1e-6 * f.c2_norm());
    }
    assert!(TestFunctionFamily::signed(1.0, 0.5, &[[0, 0]]).is_err());
}

#[test]
fn constant_state_has_zero_residuals() {
    let slices = constant_slices(1.5, 0.2, 6);
    for source in [SourceMatrix::ZERO, SourceMatrix::ROTATION, SourceMatrix::DAMPING] {
        let w = weak_residual(&slices, &plaw(), &source, &family(&slices, false), &VerifyConfig::default()).unwrap();
        for r in &w {
            assert!(r.pass && r.normalized[0] < 1e-13 && r.normalized[1] < 1e-13, "{r:?}");
        }
    }
}

#[test]
fn piecewise_constant_run_is_an_equality_case() {
    let st = two_region();
    let cfg = VerifyConfig::default();
    let report = verify_slices(&st.slices, &plaw(), &st.source, &cfg, None).unwrap();
    assert!(report.pass, "{report:#?}");
    for a in &report.admissibility {
        assert!(a.value.abs() <= a.tolerance, "{a:?}");
    }
}

#[test]
fn perturbed_run_is_admissible_and_decays() {
    let st = perturbed(&PerturbedOptions { slices: Some(32), ..PerturbedOptions::default() });
    let kappa = st.diagnostics.kappa.unwrap();
    let report = verify_slices(&st.slices, &plaw(), &st.source, &VerifyConfig::default(), Some(kappa)).unwrap();
    assert!(report.weak_pass());
    assert!(report.admissibility_pass());
    assert!(report.decay_pass());
    assert!(report.pass);
}

#[test]
fn inflated_chi_slope_is_detected() {
    let st = perturbed(&PerturbedOptions { slope_offset: 1.0, slices: Some(32), ..PerturbedOptions::default() });
    let slices = &st.slices;
    let adm = admissibility_residual(slices, &plaw(), &st.source, &family(slices, true), &VerifyConfig::default()).unwrap();
    assert!(adm.iter().any(|a| a.value < -100.0 * a.tolerance), "{adm:?}");
}

#[test]
fn momentum_blob_is_detected() {
    let st = two_region();
    let fam = family(&st.slices, false);
    let cfg = VerifyConfig::default();
    let worst = |slices: &[Slice]| {
        let w = weak_residual(slices, &plaw(), &st.source, &fam, &cfg).unwrap();
        let tol = w[0].tolerance;
        (w.iter().map(|r| r.momentum[0].hypot(r.momentum[1])).fold(0.0, f64::max), tol, w.iter().all(|r| r.pass))
    };
    let (clean, _, clean_pass) = worst(&st.slices);
    let mut slices = st.slices.clone();
    add_momentum_blob(&mut slices, [0.5, 0.5], 0.2, [0.1, 0.0]);
    let (dirty, tol, dirty_pass) = worst(&slices);
    assert!(clean_pass && !dirty_pass, "{clean} {dirty} {tol}");
    assert!(dirty > 1e8 * clean.max(1e-300) && dirty > tol, "{clean} {dirty} {tol}");
}

#[test]
fn rotation_work_is_odd_in_momentum() {
    let st = perturbed(&PerturbedOptions { slices: Some(6), ..PerturbedOptions::default() });
    let fam = family(&st.slices, false);
    let cfg = VerifyConfig::default();
    let a = weak_residual(&st.slices, &plaw(), &SourceMatrix::ROTATION, &fam, &cfg).unwrap();
    let mut flipped = st.slices.clone();
    for s in &mut flipped {
        s.m.components.iter_mut().flatten().for_each(|v| *v = -*v);
    }
    let b = weak_residual(&flipped, &plaw(), &SourceMatrix::ROTATION, &fam, &cfg).unwrap();
    let mut nonzero = false;
    for (x, y) in a.iter().zip(&b) {
        for d in 0..2 {
            let s = x.source_work[d].abs().max(1e-300);
            assert!((x.source_work[d] + y.source_work[d]).abs() <= 1e-12 * s, "{x:?} {y:?}");
            nonzero |= x.source_work[d] != 0.0;
        }
    }
    assert!(nonzero);
}

#[test]
fn dumps_give_the_same_report() {
    let st = two_region();
    let dir = std::env::temp_dir().join(format!("wildflow-verify-{}", std::process::id()));
    st.write_slices(&dir).unwrap();
    let cfg = VerifyConfig::default();
    let from_memory = verify_slices(&st.slices, &plaw(), &st.source, &cfg, None).unwrap();
    drop(st);
    let from_disk = verify_dumps(&dir, &plaw(), &SourceMatrix::ROTATION, &cfg, None).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(from_memory, from_disk);
}

#[test]
fn metadata_mismatch_is_an_error() {
    let slices = constant_slices(1.0, 0.1, 4);
    let wrong = TestFunctionFamily::signed(1.0, 2.0, &[[1, 0]]).unwrap();
    assert!(matches!(
        weak_residual(&slices, &plaw(), &SourceMatrix::ZERO, &wrong, &VerifyConfig::default()),
        Err(Error::GridMismatch(_))
    ));
    let mut shifted = slices.clone();
    shifted[2].time = shifted[1].time;
    assert!(matches!(
        weak_residual(&shifted, &plaw(), &SourceMatrix::ZERO, &family(&slices, false), &VerifyConfig::default()),
        Err(Error::GridMismatch(_))
    ));
    let signed = family(&slices, false);
    assert!(admissibility_residual(&slices, &plaw(), &SourceMatrix::ZERO, &signed, &VerifyConfig::default()).is_err());
}

#[test]
fn fresh_ansatz_distance_is_the_base_point_distance() {
    let st = two_region();
    let fields = constraint_field(&st.slices, 1e-3);
    for (s, c) in st.slices.iter().zip(&fields) {
        for k in 0..s.grid().nodes() {
            let (rho, q) = s.params_at(k);
            let w = s.state_at(k);
            let x = w.coords();
            let expected = dist_to_k_planar(&[x[0], x[1], x[2], x[3]], rho, q);
            assert_eq!(c.dist.values[k], expected);
        }
        assert!(c.summary.min_margin >= 0.0);
    }
    let values: Vec<f64> = fields[0].dist.values.clone();
    let mut distinct = values.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    assert_eq!(distinct.len(), 2);
}

#[test]
fn saturated_states_have_zero_saturation() {
    let mut slices = constant_slices(2.0, 0.5, 2);
    for s in &mut slices {
        s.m.components[0].iter_mut().for_each(|v| *v = (2.0f64 * 2.0 * 0.5).sqrt());
    }
    for c in constraint_field(&slices, 1e-3) {
        assert!(c.summary.max_saturation < 1e-14);
    }
}

#[test]
fn env_override_is_validated() {
    let cfg: VerifyConfig = crate::parse_json(r#"{"refine": 3}"#).unwrap();
    assert_eq!(cfg.refine, 3);
    assert!(matches!(VerifyConfig { refine: 0, ..cfg }.validate(), Err(Error::Config { .. })));
}
