use std::path::PathBuf;

use super::*;
use crate::error::Error;
use crate::scheme::read_stage_csv;

const SMALL_ITERATE: &str = r#"{
  "mode": "iterate",
  "seed": 2,
  "ansatz": {
    "pressure": { "a": 0.5, "gamma": 2.0 },
    "source": { "matrix": [[0.0, 1.0], [-1.0, 0.0]] },
    "density": {
      "kind": "piecewise_constant",
      "params": {
        "background": 2.0,
        "background_slope": [0.0, 0.0],
        "regions": [{ "lo": [0.25, 0.25], "hi": [0.75, 0.75], "rho": 1.0, "slope": [0.0, 0.0] }]
      }
    },
    "chi": { "value": 2.0 },
    "grid": { "resolution": 16, "length": 1.0, "t_end": 0.5, "slices": 4 }
  },
  "iteration": { "max_stages": 2, "quad_refine": 2 }
}"#;

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wildflow-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn small() -> RunConfig {
    crate::parse_json(SMALL_ITERATE).unwrap()
}

#[test]
fn iterate_writes_every_artifact_and_is_reproducible() {
    let (a, b, c) = (scratch("a"), scratch("b"), scratch("c"));
    let opts = |out: &PathBuf, seed| RunOptions { out: out.clone(), seed, ..RunOptions::default() };
    let first = run(small(), &opts(&a, None)).unwrap();
    let again = run(small(), &RunOptions { threads: Some(1), ..opts(&b, None) }).unwrap();
    let other = run(small(), &opts(&c, Some(9))).unwrap();
    assert!(first.pass);
    assert_eq!(first.manifest_sha256, again.manifest_sha256);
    assert_ne!(first.manifest_sha256, other.manifest_sha256);
    assert_eq!(other.manifest.seed, 9);

    let names: Vec<&str> = first.manifest.files.iter().map(|f| f.path.as_str()).collect();
    for expected in ["stages.csv", "census.json", "verification.json", "slices/slices.json", "samples/m_0000.bin", "dist/dist_0004.json"] {
        assert!(names.contains(&expected), "{expected} missing from {names:?}");
    }
    let csv = a.join("stages.csv");
    let stages = read_stage_csv(&csv).unwrap();
    assert_eq!(stages.len(), 2);
    let entry = first.manifest.files.iter().find(|f| f.path == "stages.csv").unwrap();
    assert_eq!(entry.sha256, sha256_hex(&std::fs::read(&csv).unwrap()));
    assert_eq!(Manifest::read(&a).unwrap(), first.manifest);
    for d in [a, b, c] {
        std::fs::remove_dir_all(d).unwrap();
    }
}

#[test]
fn stage_override_and_verify_from_input() {
    let out = scratch("verify");
    let summary = run(small(), &RunOptions { out: out.clone(), stages: Some(0), ..RunOptions::default() }).unwrap();
    assert_eq!(summary.manifest.config.iteration.max_stages, 0);

    let mut cfg = small();
    cfg.mode = Mode::Verify;
    cfg.input = Some(InputSpec { dir: out.join("slices"), kappa: None });
    let verified_dir = scratch("verified");
    let v = run(cfg, &RunOptions { out: verified_dir.clone(), ..RunOptions::default() }).unwrap();
    assert!(v.pass);
    assert!(verified_dir.join("verification.json").is_file());
    assert!(!verified_dir.join("slices").exists());
    std::fs::remove_dir_all(out).unwrap();
    std::fs::remove_dir_all(verified_dir).unwrap();
}

#[test]
fn geometry_mode_reports_five_points() {
    let cfg: RunConfig =
        crate::parse_json(r#"{"mode": "geometry", "seed": 4, "geometry": {"rho": 2.0, "q": 0.3}}"#).unwrap();
    let out = scratch("geometry");
    let s = run(cfg, &RunOptions { out: out.clone(), ..RunOptions::default() }).unwrap();
    assert!(s.pass);
    assert_eq!(s.manifest.certificates["points"], 5);
    assert!(s.manifest.certificates["slack"].as_f64().unwrap() > 0.0);
    assert_eq!(s.lines.len(), 6);
    std::fs::remove_dir_all(out).unwrap();
}

#[test]
fn schema_errors_carry_pointers() {
    let bad = SMALL_ITERATE.replace("\"max_stages\": 2", "\"max_stages\": -2");
    match crate::parse_json::<RunConfig>(&bad) {
        Err(Error::Config { pointer, .. }) => assert_eq!(pointer, "/iteration/max_stages"),
        other => panic!("{other:?}"),
    }
    let unknown = SMALL_ITERATE.replace("\"seed\": 2", "\"sead\": 2");
    assert!(matches!(crate::parse_json::<RunConfig>(&unknown), Err(Error::Config { .. })));

    let mut cfg = small();
    cfg.ansatz = None;
    let err = run(cfg, &RunOptions { out: scratch("none"), ..RunOptions::default() }).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("/ansatz"));
}

#[test]
fn numerical_failure_exits_nonzero_with_partial_stages() {
    let mut cfg = small();
    cfg.iteration.min_side = 0.1;
    let out = scratch("covering");
    let err = run(cfg, &RunOptions { out: out.clone(), ..RunOptions::default() }).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
    assert!(matches!(&err, RunError::Iteration(e) if matches!(e.source, Error::Covering(_))));
    assert!(out.join("stages.csv").is_file());
    std::fs::remove_dir_all(out).unwrap();
}
