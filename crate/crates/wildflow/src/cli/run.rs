use std::path::{Path, PathBuf};

use serde_json::json;

use super::config::{GeometrySpec, Mode, RunConfig};
use super::manifest::{file_entries, Manifest};
use crate::ansatz::{decay_profile, read_slices, write_slices, AnsatzSpec, SubsolutionState};
use crate::error::{invalid, Error, Result};
use crate::geometry::{hull_margin, hull_membership_lp, select_extreme_points, state_dim, ConstraintParams, StatePoint};
use crate::operators::FieldDump;
use crate::scheme::{
    default_tolerance, iterate, iterate_with_initial_data, state_census, write_stage_csv, IterationError,
    StageReport, StagedState,
};
use crate::verify::{verify_dumps, VerificationReport};

/// Command-line overrides of a [`RunConfig`].
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub stages: Option<usize>,
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub manifest_sha256: String,
    /// Whether the mode's checks held: contraction for the stage loop,
    /// every verification test for `verify`.
    pub pass: bool,
    /// Human-readable summary lines.
    pub lines: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Error(#[from] Error),
    #[error(transparent)]
    Iteration(#[from] IterationError),
}

impl RunError {
    /// 2 for configuration problems, 3 for numerical infeasibility, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let e = match self {
            RunError::Error(e) => e,
            RunError::Iteration(e) => &e.source,
        };
        match e {
            Error::Config { .. } | Error::InvalidInput(_) | Error::GridMismatch(_) | Error::Dump { .. } => 2,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
            _ => 3,
        }
    }
}

/// Applies the command-line overrides and `WILDFLOW_QUAD_REFINE`, then validates.
pub fn resolve(mut cfg: RunConfig, opts: &RunOptions) -> Result<RunConfig> {
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(stages) = opts.stages {
        cfg.iteration.max_stages = stages;
    }
    cfg.iteration = cfg.iteration.with_env()?;
    cfg.verify = cfg.verify.with_env()?;
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one configured pipeline and writes its artifacts and `manifest.json` under `opts.out`.
pub fn run(cfg: RunConfig, opts: &RunOptions) -> std::result::Result<RunSummary, RunError> {
    let cfg = resolve(cfg, opts)?;
    std::fs::create_dir_all(&opts.out).map_err(Error::from)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| execute(&cfg, &opts.out))?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: cfg,
        certificates: outcome.certificates,
        files: file_entries(&opts.out)?,
    };
    let manifest_sha256 = manifest.write(&opts.out)?;
    Ok(RunSummary { manifest, manifest_sha256, pass: outcome.pass, lines: outcome.lines })
}

struct Outcome {
    certificates: serde_json::Value,
    pass: bool,
    lines: Vec<String>,
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    std::fs::write(path, serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

fn execute(cfg: &RunConfig, out: &Path) -> std::result::Result<Outcome, RunError> {
    match cfg.mode {
        Mode::Geometry => Ok(geometry(cfg.geometry.as_ref().expect("validated"), cfg.seed, out)?),
        Mode::Ansatz => Ok(ansatz(cfg, out)?),
        Mode::Verify => Ok(verify(cfg, out)?),
        Mode::Iterate | Mode::IterateInitial => stage_loop(cfg, out),
    }
}

fn geometry(spec: &GeometrySpec, seed: u64, out: &Path) -> Result<Outcome> {
    let p = ConstraintParams::new(spec.rho, spec.q)?;
    let coords = spec.target.clone().unwrap_or_else(|| vec![0.0; state_dim(spec.dimension)]);
    let target = StatePoint::from_coords(spec.dimension, &coords)?;
    let margin = hull_margin(&target, &p);
    let d = select_extreme_points(&target, &p, seed)?;
    let membership = hull_membership_lp(&target, &p, spec.membership_samples, seed);
    let vertices: Vec<&[f64]> = d.vertices.iter().map(|v| v.coords()).collect();
    write_json(
        &out.join("geometry.json"),
        &json!({
            "target": coords,
            "margin": margin,
            "vertices": vertices,
            "directions": d.directions,
            "weights": d.weights,
            "slack": d.slack,
            "lp_inside": membership.inside,
            "lp_infeasibility": membership.infeasibility,
        }),
    )?;
    let mut lines = vec![format!("{} extreme points, LP slack {:.6e}, hull margin {:.6e}", d.vertices.len(), d.slack, margin)];
    for (v, w) in d.vertices.iter().zip(&d.weights) {
        let c: Vec<String> = v.coords().iter().map(|x| format!("{x:+.6}")).collect();
        lines.push(format!("  [{}] weight {w:.6}", c.join(", ")));
    }
    Ok(Outcome {
        certificates: json!({ "points": d.vertices.len(), "slack": d.slack, "margin": margin, "lp_inside": membership.inside }),
        pass: d.slack > 0.0 && membership.inside,
        lines,
    })
}

fn build(cfg: &RunConfig) -> Result<(&AnsatzSpec, SubsolutionState)> {
    let spec = cfg.ansatz.as_ref().expect("validated");
    Ok((spec, spec.build(cfg.seed)?))
}

fn ansatz_certificates(state: &SubsolutionState) -> serde_json::Value {
    let chi = state.chi.as_ref().map(|c| json!({ "min_margin": c.min_margin, "monotone": c.monotone, "richardson_gap": c.richardson_gap }));
    json!({ "kind": state.kind, "diagnostics": state.diagnostics, "chi": chi })
}

fn ansatz(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let (_, state) = build(cfg)?;
    state.write_slices(&out.join("slices"))?;
    let decay = decay_profile(&state).ok();
    write_json(
        &out.join("ansatz.json"),
        &json!({
            "kind": state.kind,
            "time": state.time,
            "constraints": state.constraints,
            "strict": state.strict,
            "diagnostics": state.diagnostics,
            "chi": state.chi,
            "decay": decay,
        }),
    )?;
    let d = &state.diagnostics;
    let lines = vec![format!(
        "{:?}: {} slices of {}^2, min margin {:.4e}, residuals {:.3e} / {:.3e}",
        state.kind,
        state.slices.len(),
        state.grid.resolution,
        d.min_margin,
        d.continuity_residual,
        d.momentum_residual
    )];
    Ok(Outcome { certificates: ansatz_certificates(&state), pass: d.min_margin > 0.0, lines })
}

fn verify(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let spec = cfg.ansatz.as_ref().expect("validated");
    let (plaw, source) = (spec.pressure_law()?, spec.source_matrix()?);
    let (dir, kappa, built) = match &cfg.input {
        Some(input) => (input.dir.clone(), input.kappa, None),
        None => {
            let (_, state) = build(cfg)?;
            let dir = out.join("slices");
            state.write_slices(&dir)?;
            (dir, state.diagnostics.kappa, Some(ansatz_certificates(&state)))
        }
    };
    let report = verify_dumps(&dir, &plaw, &source, &cfg.verify, kappa)?;
    report.write(&out.join("verification.json"))?;
    let lines = verification_lines(&report);
    Ok(Outcome { certificates: json!({ "verification": summary(&report), "ansatz": built }), pass: report.pass, lines })
}

fn summary(r: &VerificationReport) -> serde_json::Value {
    let worst_adm = r.admissibility.iter().map(|a| a.value / a.tolerance).fold(f64::INFINITY, f64::min);
    json!({
        "pass": r.pass,
        "weak": r.weak_pass(),
        "admissibility": r.admissibility_pass(),
        "decay": r.decay_pass(),
        "unresolved": r.unresolved,
        "worst_admissibility_over_tolerance": if r.admissibility.is_empty() { None } else { Some(worst_adm) },
    })
}

fn verification_lines(r: &VerificationReport) -> Vec<String> {
    let worst = |f: &dyn Fn(&crate::verify::WeakResidual) -> f64| r.weak.iter().map(f).fold(0.0, f64::max);
    vec![
        format!(
            "weak: {} tests, worst continuity {:.3e}, worst momentum {:.3e} (normalized), pass {}",
            r.weak.len(),
            worst(&|w| w.normalized[0]),
            worst(&|w| w.normalized[1]),
            r.weak_pass()
        ),
        format!(
            "admissibility: {} tests, min value {:.3e}, pass {}",
            r.admissibility.len(),
            r.admissibility.iter().map(|a| a.value).fold(f64::INFINITY, f64::min),
            r.admissibility_pass()
        ),
        format!("decay: {}, unresolved: {}, overall pass {}", r.decay_pass(), r.unresolved, r.pass),
    ]
}

fn stage_line(r: &StageReport) -> String {
    format!(
        "stage {:>2}: dist {:.4e} <= {:.4e} (+{:.1e}) {}  |w|^2 {:.5} (+{:.3e})  pairing {:.2e}/{:.2e}  cubes {:.3e}  kernels {}",
        r.stage,
        r.dist_integral,
        r.schedule_bound,
        r.quad_tolerance,
        if r.contracts() { "ok" } else { "FAIL" },
        r.l2_norm,
        r.l2_increment,
        r.pairing,
        r.pairing_bound,
        r.cube_count,
        r.kernels
    )
}

fn stage_loop(cfg: &RunConfig, out: &Path) -> std::result::Result<Outcome, RunError> {
    let (_, base) = build(cfg)?;
    base.write_slices(&out.join("slices"))?;
    let ansatz_cert = ansatz_certificates(&base);
    let initial = cfg.mode == Mode::IterateInitial;
    let csv = out.join("stages.csv");
    let result = if initial {
        iterate_with_initial_data(base, &cfg.iteration, cfg.seed).map(|(m, s, r)| (Some(m), s, r))
    } else {
        iterate(base, &cfg.iteration, cfg.seed).map(|(s, r)| (None, s, r))
    };
    let (momentum, state, reports) = match result {
        Ok(v) => v,
        Err(e) => {
            write_stage_csv(&e.reports, &csv)?;
            return Err(e.into());
        }
    };
    write_stage_csv(&reports, &csv)?;
    dump_state(&state, out)?;
    let mut lines: Vec<String> = reports.iter().map(stage_line).collect();

    let labels: Vec<u32> = state.base.constraints.iter().map(|c| c.label).collect();
    let census: Vec<_> = labels.iter().map(|&l| state_census(&state, l, default_tolerance(&state, l))).collect();
    write_json(&out.join("census.json"), &census)?;
    for c in &census {
        lines.push(format!(
            "census label {}: {} significant clusters, off-cluster {:.3}, TV {}",
            c.label,
            c.significant,
            c.off_cluster,
            c.tv_distance.map_or("-".into(), |t| format!("{t:.4}"))
        ));
    }

    let mut initial_cert = serde_json::Value::Null;
    if let Some(m) = momentum {
        let dir = out.join("initial");
        FieldDump::vector(&m.coarse, 0.0, "m_coarse").write(&dir)?;
        FieldDump::vector(&m.sample, 0.0, "m_sample").write(&dir)?;
        FieldDump::scalar(&m.saturation, 0.0, "saturation").write(&dir)?;
        let medians: Vec<Option<f64>> = reports.iter().map(|r| r.saturation_median).collect();
        initial_cert = json!({ "saturation_median": m.median, "stage_medians": medians });
        lines.push(format!("initial momentum: saturation median {:.4e}", m.median));
    }

    let spec = cfg.ansatz.as_ref().expect("validated");
    let report = verify_dumps(&out.join("slices"), &spec.pressure_law()?, &spec.source_matrix()?, &cfg.verify, state.base.diagnostics.kappa)?;
    report.write(&out.join("verification.json"))?;
    lines.extend(verification_lines(&report));

    let pass = reports.iter().all(|r| r.contracts() && r.l2_monotone());
    let last = reports.last();
    let certificates = json!({
        "ansatz": ansatz_cert,
        "stages": reports.len(),
        "contracts": reports.iter().all(StageReport::contracts),
        "l2_monotone": reports.iter().all(StageReport::l2_monotone),
        "pairing_ok": reports.iter().all(StageReport::pairing_ok),
        "weak_star_ok": reports.iter().all(StageReport::weak_star_ok),
        "final_dist": last.map(|r| r.dist_integral),
        "final_l2": last.map(|r| r.l2_norm),
        "census": census.iter().map(|c| json!({ "label": c.label, "significant": c.significant, "tv": c.tv_distance })).collect::<Vec<_>>(),
        "initial": initial_cert,
        "verification": summary(&report),
    });
    Ok(Outcome { certificates, pass, lines })
}

/// Writes `dist/` (chain-averaged distance per slice) and `samples/` (chain 0).
fn dump_state(state: &StagedState, out: &Path) -> Result<()> {
    for (j, d) in state.dist_slices().iter().enumerate() {
        FieldDump::scalar(d, state.base.slices[j].time, &format!("dist_{j:04}")).write(&out.join("dist"))?;
    }
    write_slices(&state.sample_slices(0), &out.join("samples"))
}

/// Slices of a finished run, for tools that only see the output directory.
pub fn read_run_slices(out: &Path) -> Result<Vec<crate::ansatz::Slice>> {
    read_slices(&out.join("slices"))
}
