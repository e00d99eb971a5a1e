use super::*;
use crate::ansatz::{
    build_perturbed_density, build_piecewise_constant, BoxRegion, DensityMode, ModalDensity, PerturbedOptions,
    PressureLaw, RegionDensity, SourceMatrix, TimeGrid,
};
use crate::error::Error;
use crate::operators::TorusGrid;

fn two_region(n: usize, slices: usize) -> SubsolutionState {
    let density = RegionDensity {
        background: 2.0,
        background_slope: [0.0; 2],
        regions: vec![BoxRegion { lo: [0.25, 0.25], hi: [0.75, 0.75], rho: 1.0, slope: [0.0; 2] }],
    };
    let plaw = PressureLaw::new(0.5, 2.0).unwrap();
    let grid = TorusGrid::new(n, 1.0).unwrap();
    build_piecewise_constant(grid, TimeGrid { t_end: 0.5, slices }, &density, 2.0, plaw, SourceMatrix::ROTATION, 3).unwrap()
}

fn cfg(stages: usize) -> IterationConfig {
    IterationConfig { max_stages: stages, quad_refine: 2, ..IterationConfig::default() }
}

#[test]
fn zero_stages_is_the_identity() {
    let before = StagedState::new(two_region(16, 4), &cfg(0), 1).unwrap();
    let (after, reports) = iterate(two_region(16, 4), &cfg(0), 1).unwrap();
    assert!(reports.is_empty());
    assert_eq!(after.dist_integral(), before.dist_integral());
    assert_eq!(after.l2_distance(&before).unwrap().0, 0.0);
}

#[test]
fn one_stage_halves_the_distance() {
    let c = cfg(1);
    let mut st = StagedState::new(two_region(16, 4), &c, 5).unwrap();
    let (d0, _) = st.dist_integral();
    let r = st.one_stage(0.5 * d0, Pass::Generic, &c).unwrap();
    assert!(r.contracts(), "{r:?}");
    assert!(r.dist_integral <= 0.5 * d0 + r.quad_tolerance);
    assert!(r.weak_star_ok(), "{r:?}");
    assert!(r.deficit <= r.deficit_budget * (1.0 + 1e-12));
    assert_eq!(r.rejected, 0);
    assert!(r.min_slack > 0.0);
    assert!(r.lambda_min >= 1.0 && r.lambda_min <= r.lambda_median && r.lambda_median <= r.lambda_max);
}

#[test]
fn six_stages_contract_and_concentrate_on_five_states() {
    let (st, reports) = iterate(two_region(32, 4), &cfg(6), 11).unwrap();
    assert_eq!(reports.len(), 6);
    for r in &reports {
        assert!(r.contracts(), "{r:?}");
        assert!(r.l2_monotone(), "{r:?}");
    }
    assert!(reports[5].dist_d1 <= reports[0].dist_d1 / 64.0);
    let census = state_census(&st, 1, default_tolerance(&st, 1));
    assert_eq!(census.significant, 5, "{census:?}");
    assert!(census.off_cluster <= 0.1);
    assert!(census.tv_distance.unwrap() <= 0.15);
}

#[test]
fn runs_are_reproducible_and_seed_dependent() {
    let run = |seed| {
        let (st, mut reports) = iterate(two_region(16, 4), &cfg(2), seed).unwrap();
        reports.iter_mut().for_each(|r| r.wall_ms = 0.0);
        (st, reports)
    };
    let (a, ra) = run(3);
    let (b, rb) = run(3);
    let (c, _) = run(4);
    assert_eq!(ra, rb);
    assert_eq!(a.l2_distance(&b).unwrap().0, 0.0);
    let (d, se) = a.l2_distance(&c).unwrap();
    let floor = ra.last().unwrap().l2_tolerance;
    assert!(d > 10.0 * floor.max(3.0 * se), "{d} {floor} {se}");
}

#[test]
fn inert_region_census_is_a_single_state() {
    let st = StagedState::new(two_region(16, 4), &cfg(0), 1).unwrap();
    let census = state_census(&st, 0, 1e-6);
    assert_eq!(census.clusters.len(), 1);
    let c = &census.clusters[0];
    assert!((c.fraction - 1.0).abs() < 1e-12 && c.rho == 2.0);
    assert_eq!(c.representative, [0.0; 4]);
}

#[test]
fn initial_pass_needs_the_initial_slice() {
    let mut base = two_region(16, 4);
    base.strict.t_start = 0.2;
    match iterate_with_initial_data(base, &cfg(1), 0) {
        Err(e) => assert!(matches!(e.source, Error::InvalidInput(_)), "{e}"),
        Ok(_) => panic!("expected an error"),
    }
}

#[test]
fn initial_data_saturation_decreases() {
    let grid = TorusGrid::new(16, 2.0 * std::f64::consts::PI).unwrap();
    let rho0 = ModalDensity { mean: 1.0, modes: vec![DensityMode { k: [1, 0], amplitude: 1e-3, phase: 0.0 }] }.sample(&grid);
    let opts = PerturbedOptions { slices: Some(8), ..PerturbedOptions::default() };
    let base = build_perturbed_density(&rho0, PressureLaw::new(0.5, 2.0).unwrap(), SourceMatrix::DAMPING, &opts).unwrap();
    let m0 = base.slices[0].m.clone();
    let (m, _, reports) = iterate_with_initial_data(base, &cfg(4), 2).unwrap();
    let sat: Vec<f64> = reports.iter().map(|r| r.saturation_median.unwrap()).collect();
    assert!(sat.windows(2).all(|w| w[1] < w[0]), "{sat:?}");
    assert_eq!(m.coarse, m0);
    assert!(reports.iter().all(|r| r.pass == "initial"));
}

#[test]
fn region_distances() {
    let st = StagedState::new(two_region(16, 4), &cfg(0), 1).unwrap();
    let r = &st.region;
    let h = r.grid.spacing();
    assert_eq!(r.boundary_faces(), 4 * 8);
    assert!((r.area() - 0.25).abs() < 1e-12);
    let corner = 4 * 16 + 4;
    assert!((r.spatial_distance(corner, [0.0, 0.0]) - 0.5 * h).abs() < 1e-15);
    let centre = 8 * 16 + 8;
    assert!(r.spatial_distance(centre, [0.0, 0.0]).is_infinite());
    assert!(r.open_end && r.temporal_distance(0.1) == 0.1);
}

#[test]
fn config_validation_and_env() {
    let bad = IterationConfig { test_modes: vec![], ..IterationConfig::default() };
    match bad.validate() {
        Err(Error::Config { pointer, .. }) => assert_eq!(pointer, "/test_modes"),
        other => panic!("{other:?}"),
    }
    let parsed: IterationConfig = crate::parse_json(r#"{"max_stages": 3}"#).unwrap();
    assert_eq!(parsed.max_stages, 3);
    assert_eq!(parsed.levels, IterationConfig::default().levels);
}

#[test]
fn stage_csv_round_trip() {
    let (_, reports) = iterate(two_region(16, 4), &cfg(2), 1).unwrap();
    let path = std::env::temp_dir().join(format!("wildflow-stages-{}.csv", std::process::id()));
    write_stage_csv(&reports, &path).unwrap();
    let back = read_stage_csv(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(back.len(), 2);
    for (a, b) in back.iter().zip(&reports) {
        assert_eq!(a.stage, b.stage);
        assert_eq!(a.dist_integral, b.dist_integral);
        assert_eq!(a.saturation_median, b.saturation_median);
    }
}

#[test]
fn weighted_sum_standard_error() {
    let (s, se) = weighted_sum(&[1.0, 1.0, 1.0, 1.0], &[1.0, 3.0, 2.0, 2.0], 2);
    assert_eq!(s, 8.0);
    assert!((se - 2f64.sqrt() * 2f64.sqrt()).abs() < 1e-12);
}
