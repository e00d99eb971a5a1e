use std::f64::consts::PI;

use super::*;
use crate::error::Error;
use crate::geometry::StatePoint;
use crate::operators::TorusGrid;

fn two_regions() -> RegionDensity {
    RegionDensity {
        background: 2.0,
        background_slope: [0.0; 2],
        regions: vec![BoxRegion { lo: [0.25, 0.25], hi: [0.75, 0.75], rho: 1.0, slope: [0.0; 2] }],
    }
}

fn small_grid() -> TorusGrid {
    TorusGrid::new(32, 1.0).unwrap()
}

fn time() -> TimeGrid {
    TimeGrid { t_end: 0.5, slices: 4 }
}

#[test]
fn single_region_equality_is_inert() {
    let plaw = PressureLaw::new(1.0, 2.0).unwrap();
    let s = build_piecewise_constant(small_grid(), time(), &RegionDensity::constant(1.0), 1.0, plaw, SourceMatrix::ZERO, 1)
        .unwrap();
    assert!(matches!(s.constraints[0].set, ConstraintSet::Inert));
    assert_eq!(s.constraints[0].q, 0.0);
    assert!(s.strict.labels.is_empty());
}

#[test]
fn two_region_levels_and_sets() {
    let plaw = PressureLaw::new(0.5, 2.0).unwrap();
    let s = build_piecewise_constant(small_grid(), time(), &two_regions(), 2.0, plaw, SourceMatrix::ROTATION, 3).unwrap();
    assert_eq!(s.constraints[0].q, 0.0);
    assert!(matches!(s.constraints[0].set, ConstraintSet::Inert));
    assert!((s.constraints[1].q - 1.5).abs() < 1e-15);
    match &s.constraints[1].set {
        ConstraintSet::Finite { decomposition } => {
            assert_eq!(decomposition.vertices.len(), 5);
            assert!(decomposition.slack > 0.0);
        }
        other => panic!("expected a finite set, got {other:?}"),
    }
    assert_eq!(s.strict.labels, vec![1]);
    assert!((s.diagnostics.min_margin - 1.5).abs() < 1e-12);
    assert_eq!(s.diagnostics.continuity_residual, 0.0);
    assert!(s.diagnostics.momentum_residual < 1e-12);
    let active = s.regions.iter().filter(|&&l| l == 1).count();
    assert_eq!(active, 16 * 16);
}

#[test]
fn chi_below_pressure_is_rejected() {
    let plaw = PressureLaw::new(0.5, 2.0).unwrap();
    let err = build_piecewise_constant(small_grid(), time(), &two_regions(), 1.9, plaw, SourceMatrix::ZERO, 0).unwrap_err();
    assert!(matches!(err, Error::ChiInfeasible { .. }));
}

#[test]
fn piecewise_constant_production_vanishes() {
    let plaw = PressureLaw::new(0.5, 2.0).unwrap();
    let s = build_piecewise_constant(small_grid(), time(), &two_regions(), 2.0, plaw, SourceMatrix::ROTATION, 3).unwrap();
    let scale = production_scale(&s, &plaw);
    for p in energy_production(&s, &plaw, &SourceMatrix::ROTATION) {
        assert!(p.sup_norm() <= 1e-8 * scale);
    }
}

fn perturbed(eps: f64, opts: &PerturbedOptions) -> crate::error::Result<SubsolutionState> {
    let grid = TorusGrid::new(32, 2.0 * PI).unwrap();
    let rho0 = ModalDensity { mean: 1.0, modes: vec![DensityMode { k: [1, 0], amplitude: eps, phase: 0.0 }] }.sample(&grid);
    build_perturbed_density(&rho0, PressureLaw::new(0.5, 2.0).unwrap(), SourceMatrix::DAMPING, opts)
}

#[test]
fn constant_density_has_no_potential() {
    let s = perturbed(0.0, &PerturbedOptions::default()).unwrap();
    assert!(s.psi.as_ref().unwrap().sup_norm() == 0.0);
    let chi = s.chi.as_ref().unwrap();
    for sl in &s.slices {
        assert_eq!(sl.m.sup_norm(), 0.0);
        let expected = chi.eval(sl.time).0;
        assert!(sl.q.values.iter().all(|&q| (q - expected).abs() < 1e-15));
    }
}

#[test]
fn single_mode_perturbation() {
    let s = perturbed(1e-3, &PerturbedOptions::default()).unwrap();
    let scale = s.diagnostics.scale;
    assert!(s.diagnostics.continuity_residual <= 1e-8 * scale, "{}", s.diagnostics.continuity_residual);
    assert!(s.diagnostics.momentum_residual <= 1e-8 * scale, "{}", s.diagnostics.momentum_residual);
    assert!(s.diagnostics.min_margin > 0.0);
    let [dev, slope] = s.diagnostics.smallness.unwrap();
    assert!((dev - 1e-3).abs() < 1e-12 && (slope - 1e-3).abs() < 1e-5);
    let mid = &s.slices[s.slices.len() / 4];
    assert!(mid.m.sup_norm() > 0.0);
    assert!(mid.m.components[1].iter().all(|v| v.abs() < 1e-15));
    for d in decay_profile(&s).unwrap() {
        assert!(d.deviation <= d.bound, "{d:?}");
    }
}

#[test]
fn smallness_is_measured() {
    let opts = PerturbedOptions { eps_budget: 1e-3, ..PerturbedOptions::default() };
    match perturbed(5e-3, &opts) {
        Err(Error::Smallness { value, .. }) => assert!((value - 5e-3).abs() < 1e-9),
        other => panic!("expected smallness error, got {other:?}"),
    }
}

#[test]
fn certified_chi_gives_nonpositive_production() {
    let plaw = PressureLaw::new(0.5, 2.0).unwrap();
    let s = perturbed(1e-3, &PerturbedOptions::default()).unwrap();
    let scale = production_scale(&s, &plaw);
    let worst = energy_production(&s, &plaw, &s.source).iter().flat_map(|p| p.values.clone()).fold(f64::MIN, f64::max);
    assert!(worst <= 1e-6 * scale, "{worst}");

    let bad = perturbed(1e-3, &PerturbedOptions { slope_offset: 1.0, ..PerturbedOptions::default() }).unwrap();
    let worst = energy_production(&bad, &plaw, &bad.source).iter().flat_map(|p| p.values.clone()).fold(f64::MIN, f64::max);
    assert!(worst > 1e-3 * scale, "{worst}");
}

fn step_density() -> RegionDensity {
    RegionDensity {
        background: 2.0,
        background_slope: [0.1, -0.05],
        regions: vec![BoxRegion { lo: [0.25, 0.25], hi: [0.75, 0.75], rho: 1.0, slope: [0.2, 0.1] }],
    }
}

#[test]
fn lipschitz_constant_density_reduces_to_piecewise_constant() {
    let plaw = PressureLaw::new(0.5, 2.0).unwrap();
    let s = build_piecewise_lipschitz(
        &RegionDensity::constant(1.0),
        small_grid(),
        plaw,
        SourceMatrix::ROTATION,
        &LipschitzOptions::default(),
        0,
    )
    .unwrap();
    for sl in &s.slices {
        assert_eq!(sl.m.sup_norm(), 0.0);
        assert!(sl.rho.values.iter().all(|&r| (r - 1.0).abs() < 1e-14));
    }
    assert_eq!(s.constraints.len(), 1);
}

#[test]
fn lipschitz_cubes_have_zero_face_flux() {
    let plaw = PressureLaw::new(0.5, 2.0).unwrap();
    let opts = LipschitzOptions::default();
    let s = build_piecewise_lipschitz(&step_density(), small_grid(), plaw, SourceMatrix::ROTATION, &opts, 0).unwrap();
    let d = &s.diagnostics;
    assert!(d.face_flux.unwrap() <= 1e-8, "{:?}", d.face_flux);
    assert!(d.continuity_residual <= 1e-8 * d.scale, "{}", d.continuity_residual);
    assert!(d.min_margin > 0.0);
    assert!(d.mean_residual.unwrap().is_finite());
    let cubes = dyadic_cover(&step_density(), &small_grid(), opts.theta, 4).unwrap();
    assert_eq!(cubes.iter().map(|c| c.cells * c.cells).sum::<usize>(), 32 * 32);
    let last = s.slices.last().unwrap();
    assert_eq!(last.m.sup_norm(), 0.0);
    for c in &s.constraints {
        match &c.set {
            ConstraintSet::Finite { decomposition } => assert_eq!(decomposition.vertices.len(), 5),
            other => panic!("expected a finite set, got {other:?}"),
        }
        assert!(c.q > 0.0);
    }
    assert!(last.margin_at(0) > 0.0);
    assert_eq!(last.state_at(0), StatePoint::zero(2));
}

#[test]
fn covering_reports_failure() {
    let opts = LipschitzOptions { theta: 1e-4, ..LipschitzOptions::default() };
    let err = dyadic_cover(&step_density(), &small_grid(), opts.theta, 4).unwrap_err();
    assert!(matches!(err, Error::Covering(_)));
}

#[test]
fn slices_round_trip() {
    let s = perturbed(1e-3, &PerturbedOptions { slices: Some(4), ..PerturbedOptions::default() }).unwrap();
    let dir = std::env::temp_dir().join(format!("wildflow-slices-{}", std::process::id()));
    s.write_slices(&dir).unwrap();
    let back = read_slices(&dir).unwrap();
    assert_eq!(back, s.slices);
    std::fs::remove_dir_all(&dir).unwrap();
}

const TWO_REGION_SPEC: &str = r#"{
  "pressure": {"a": 0.5, "gamma": 2.0},
  "source": {"matrix": [[0.0, 1.0], [-1.0, 0.0]]},
  "density": {"kind": "piecewise_constant",
              "params": {"background": 2.0, "regions": [{"lo": [0.25, 0.25], "hi": [0.75, 0.75], "rho": 1.0}]}},
  "chi": {"value": 2.0},
  "grid": {"resolution": 32, "length": 1.0, "t_end": 0.5, "slices": 4}
}"#;

#[test]
fn spec_builds_the_two_region_state() {
    let spec: AnsatzSpec = crate::parse_json(TWO_REGION_SPEC).unwrap();
    let s = spec.build(3).unwrap();
    assert_eq!(s.kind, AnsatzKind::PiecewiseConstant);
    assert!((s.constraints[1].q - 1.5).abs() < 1e-15);
}

#[test]
fn ansatz_config_errors_carry_json_pointers() {
    let bad = TWO_REGION_SPEC.replace(r#""rho": 1.0}"#, r#""rho": "one"}"#);
    match crate::parse_json::<AnsatzSpec>(&bad) {
        Err(Error::Config { pointer, .. }) => assert_eq!(pointer, "/density/params/regions/0/rho"),
        other => panic!("expected config error, got {other:?}"),
    }
    let unknown = TWO_REGION_SPEC.replace(r#""value": 2.0"#, r#""valeu": 2.0"#);
    match crate::parse_json::<AnsatzSpec>(&unknown) {
        Err(Error::Config { pointer, message }) => {
            assert_eq!(pointer, "/chi/valeu");
            assert!(message.contains("unknown field"));
        }
        other => panic!("expected config error, got {other:?}"),
    }
    let missing = TWO_REGION_SPEC.replace(r#""value": 2.0"#, "");
    let spec: AnsatzSpec = crate::parse_json(&missing).unwrap();
    match spec.build(0) {
        Err(Error::Config { pointer, .. }) => assert_eq!(pointer, "/chi/value"),
        other => panic!("expected config error, got {other:?}"),
    }
}
