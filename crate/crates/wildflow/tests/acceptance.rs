//! Acceptance criteria, one pass/fail line each.
//!
//! Run with `cargo test --release --test acceptance`. The contraction and
//! census criteria share one full-resolution run of the bundled two-region
//! configuration and take a couple of minutes.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wildflow::ansatz::{solve_chi, ChiParams};
use wildflow::cli::{run, RunConfig, RunOptions};
use wildflow::geometry::{
    hull_margin, hull_membership_lp, sample_affine_rank, sample_extreme_neighborhood, select_extreme_points,
    simplex_size, state_dim, ConstraintParams, StatePoint,
};
use wildflow::operators::{r_torus, random_band_limited, DeviatorField, TorusGrid, VectorField};
use wildflow::profiles::PlateauCutoff;
use wildflow::scheme::{read_stage_csv, Census};
use wildflow::verify::VerificationReport;
use wildflow::waves::{random_points, sampled_sup_distance, wave_residual, Correction, LambdaRule, WaveAtom, WaveOptions};

type Outcome = Result<String, String>;

const J: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];
const MINUS_I: [[f64; 2]; 2] = [[-1.0, 0.0], [0.0, -1.0]];

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wildflow-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn random_interior(n: usize, p: &ConstraintParams, rng: &mut ChaCha8Rng, spread: f64) -> StatePoint {
    loop {
        let c: Vec<f64> = (0..state_dim(n)).map(|_| rng.gen_range(-spread..spread)).collect();
        let w = StatePoint::from_coords(n, &c).expect("valid dimension");
        if hull_margin(&w, p) > 1e-3 {
            return w;
        }
    }
}

fn extreme_point_count() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [2, 3] {
        let p = ConstraintParams::new(1.0 + 0.5 * (n as f64 - 2.0), 0.4).map_err(|e| e.to_string())?;
        let (mut exact, mut min_slack) = (0, f64::INFINITY);
        for i in 0..100 {
            let w = random_interior(n, &p, &mut rng, 0.3);
            let dec = select_extreme_points(&w, &p, i).map_err(|e| format!("n = {n}: {e}"))?;
            exact += usize::from(dec.vertices.len() == simplex_size(n) && dec.slack > 0.0);
            min_slack = min_slack.min(dec.slack);
        }
        ok &= exact == 100;
        detail.push(format!("n = {n}: {exact}/100 with {} points, min slack {min_slack:.2e}", simplex_size(n)));
    }
    check(ok, detail.join("; "))
}

fn hull_characterization() -> Outcome {
    let p = ConstraintParams::new(1.0, 0.5).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut decided, mut disagree, mut inside) = (0, 0, 0);
    for i in 0..10_000 {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.8..0.8)).collect();
        let w = StatePoint::from_coords(2, &c).map_err(|e| e.to_string())?;
        let margin = hull_margin(&w, &p);
        if margin.abs() <= 1e-6 {
            continue;
        }
        decided += 1;
        inside += usize::from(margin > 0.0);
        if hull_membership_lp(&w, &p, 100, i).inside != (margin > 0.0) {
            disagree += 1;
        }
    }
    check(disagree == 0, format!("{disagree} disagreements over {decided} decided points ({inside} inside)"))
}

fn random_atom(rng: &mut ChaCha8Rng, source: [[f64; 2]; 2], correction: Correction, seed: u64) -> Result<WaveAtom, String> {
    let p = ConstraintParams::new(rng.gen_range(0.5..2.0), rng.gen_range(0.2..0.8)).map_err(|e| e.to_string())?;
    let w = random_interior(2, &p, rng, 0.3);
    let dec = select_extreme_points(&w, &p, seed).map_err(|e| e.to_string())?;
    let i = rng.gen_range(0..dec.vertices.len());
    let j = (i + rng.gen_range(1..dec.vertices.len())) % dec.vertices.len();
    let (w1, w2) = (&dec.vertices[i], &dec.vertices[j]);
    let s = rng.gen_range(0.2..0.8);
    let base = w1.scale(s).add(&w2.scale(1.0 - s));
    let cube = PlateauCutoff::new(vec![0.5; 3], vec![0.5; 3], 0.9).map_err(|e| e.to_string())?;
    let opts = WaveOptions { correction, rule: LambdaRule::Fixed, ..WaveOptions::default() };
    WaveAtom::build(&base, w1, w2, cube, 1.0, source, 40.0, &opts).map_err(|e| e.to_string())
}

fn wave_exactness() -> Outcome {
    let sources = [("0", [[0.0; 2]; 2]), ("J", J), ("-I", MINUS_I)];
    let mut worst: f64 = 0.0;
    let mut min_gain = f64::INFINITY;
    for k in 0..20u64 {
        let (_, source) = sources[k as usize % 3];
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k);
        let atom = random_atom(&mut rng, source, Correction::Full, k)?;
        let pts = random_points(&atom.cutoff, 1000, k);
        let r = wave_residual(&atom, &pts, &[]);
        worst = worst.max(r.divergence.max(r.momentum) / atom.amplitude());
        if source == J {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + k);
            let bare = random_atom(&mut rng, source, Correction::WithoutCorrector, k)?;
            let b = wave_residual(&bare, &pts, &[]).momentum;
            min_gain = min_gain.min(b / r.momentum.max(f64::MIN_POSITIVE));
        }
    }
    check(
        worst <= 1e-9 && min_gain > 1e3,
        format!("worst residual / amplitude {worst:.2e}, smallest uncorrected/corrected ratio with B = J {min_gain:.2e}"),
    )
}

fn frequency_law() -> Outcome {
    let jump = StatePoint::planar([0.6, 0.8], 0.48, 0.14);
    let cube = PlateauCutoff::new(vec![0.5; 3], vec![0.5; 3], 0.9).map_err(|e| e.to_string())?;
    let opts = WaveOptions { correction: Correction::Full, rule: LambdaRule::Fixed, ..WaveOptions::default() };
    let base = WaveAtom::build(&StatePoint::zero(2), &jump.scale(-0.4), &jump.scale(0.6), cube, 1.0, J, 400.0, &opts)
        .map_err(|e| e.to_string())?;
    let pts = random_points(&base.cutoff, 4000, 5);
    let d: Vec<f64> = (0..5).map(|k| sampled_sup_distance(&base.with_lambda(400.0 * 2f64.powi(k)), &pts)).collect();
    let ratios: Vec<f64> = d.windows(2).map(|w| w[1] / w[0]).collect();
    let ok = ratios.iter().all(|r| (r / 0.5).max(0.5 / r) <= 1.2);
    check(ok, format!("lambda 400..6400, successive ratios {:.3?}", ratios))
}

fn divergence_round_trip() -> Outcome {
    let grid = TorusGrid::new(128, 2.0 * PI).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let f = VectorField {
            grid,
            components: [random_band_limited(grid, 16, 2 * seed).values, random_band_limited(grid, 16, 2 * seed + 1).values],
        };
        let (r, unresolved) = r_torus(&f);
        let div = r.divergence();
        let mut err: f64 = 0.0;
        for c in 0..2 {
            for (a, b) in div.components[c].iter().zip(&f.components[c]) {
                err = err.max((a - (b - unresolved.mean[c])).abs());
            }
        }
        worst = worst.max(err / f.sup_norm());
    }
    let f = VectorField::from_fn(grid, |x| [x[0].cos(), 0.0]);
    let exact = DeviatorField { grid, r11: grid.sample(|x| x[0].sin()).values, r12: vec![0.0; grid.nodes()] };
    let closed = r_torus(&f).0.max_distance(&exact);
    check(worst <= 1e-10 && closed <= 1e-12, format!("worst relative residual {worst:.2e}, closed form error {closed:.2e}"))
}

struct TwoRegion {
    out: PathBuf,
}

impl TwoRegion {
    fn run() -> Result<Self, String> {
        let out = scratch("two-region");
        let cfg = RunConfig::from_file(&configs().join("two_region.json")).map_err(|e| e.to_string())?;
        run(cfg, &RunOptions { out: out.clone(), ..RunOptions::default() }).map_err(|e| e.to_string())?;
        Ok(Self { out })
    }

    fn contraction(&self) -> Outcome {
        let reports = read_stage_csv(&self.out.join("stages.csv")).map_err(|e| e.to_string())?;
        let contracting = reports.iter().filter(|r| r.contracts()).count();
        let monotone = reports.iter().filter(|r| r.l2_monotone()).count();
        let last = reports.last().map_or(f64::NAN, |r| r.dist_integral);
        check(
            reports.len() == 6 && contracting == 6 && monotone == 6,
            format!("{} stages, {contracting} contract, {monotone} L2 monotone, final dist {last:.2e}", reports.len()),
        )
    }

    fn census(&self) -> Outcome {
        let census: Vec<Census> = read_json(&self.out.join("census.json"))?;
        let active = census.iter().find(|c| c.reference_weights.is_some()).ok_or("no active region in the census")?;
        let captured = 1.0 - active.off_cluster;
        let tv = active.tv_distance.unwrap_or(f64::INFINITY);
        check(
            active.significant == 5 && captured >= 0.9 && tv <= 0.15,
            format!("label {}: {} clusters holding {captured:.3} of the measure, TV {tv:.4}", active.label, active.significant),
        )
    }
}

fn admissibility(two_region: &TwoRegion) -> Outcome {
    let constant: VerificationReport = read_json(&two_region.out.join("verification.json"))?;
    let out = scratch("perturbed");
    let cfg = RunConfig::from_file(&configs().join("perturbed.json")).map_err(|e| e.to_string())?;
    run(cfg, &RunOptions { out: out.clone(), ..RunOptions::default() }).map_err(|e| e.to_string())?;
    let perturbed: VerificationReport = read_json(&out.join("verification.json"))?;
    let _ = std::fs::remove_dir_all(&out);

    let lower = |r: &VerificationReport| r.admissibility.iter().all(|a| a.value >= -a.tolerance);
    let equality = constant.admissibility.iter().all(|a| a.value.abs() <= a.tolerance);
    let worst = |r: &VerificationReport| r.admissibility.iter().map(|a| a.value / a.tolerance).fold(f64::INFINITY, f64::min);
    let decay = perturbed.decay.as_ref().is_some_and(|d| !d.is_empty() && d.iter().all(|s| s.deviation <= s.bound));
    check(
        lower(&constant) && equality && lower(&perturbed) && decay,
        format!(
            "piecewise constant: min value/tolerance {:.2e}, equality {equality}; perturbed: min value/tolerance {:.2e}, decay {decay}",
            worst(&constant),
            worst(&perturbed)
        ),
    )
}

fn chi_feasibility() -> Outcome {
    let small = solve_chi(ChiParams::general_source(1.0, 1e-3, 10.0, 0.1));
    let large = solve_chi(ChiParams::general_source(1.0, 1.0, 10.0, 0.1));
    check(
        small.is_ok() && large.is_err(),
        format!(
            "eps = 1e-3: {}; eps = 1: {}",
            small.as_ref().map_or_else(|e| e.to_string(), |c| format!("feasible, min margin {:.3e}", c.min_margin)),
            large.as_ref().map_or_else(|e| e.to_string(), |_| "feasible".into())
        ),
    )
}

fn affine_rank() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [2, 3] {
        let p = ConstraintParams::new(1.0, 1.0 / n as f64).map_err(|e| e.to_string())?;
        let mut xi0 = vec![0.0; n];
        xi0[0] = 1.0;
        let ranks: Vec<usize> = [0.3, 0.1, 0.03]
            .iter()
            .map(|&delta| sample_affine_rank(&sample_extreme_neighborhood(&p, &xi0, delta, 1000, 7), 1e-9))
            .collect();
        ok &= ranks.iter().all(|&r| r == state_dim(n));
        detail.push(format!("n = {n}: ranks {ranks:?} of {}", state_dim(n)));
    }
    check(ok, detail.join("; "))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS  {name:<28} {d} [{secs:.1} s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name:<28} {d} [{secs:.1} s]");
            }
        }
    };

    let t = Instant::now();
    report("extreme-point count", t, extreme_point_count());
    let t = Instant::now();
    report("hull characterization", t, hull_characterization());
    let t = Instant::now();
    report("wave exactness", t, wave_exactness());
    let t = Instant::now();
    report("frequency law", t, frequency_law());
    let t = Instant::now();
    report("divergence round trip", t, divergence_round_trip());

    let t = Instant::now();
    match TwoRegion::run() {
        Ok(two_region) => {
            report("scheme contraction", t, two_region.contraction());
            let t = Instant::now();
            report("finite-states trend", t, two_region.census());
            let t = Instant::now();
            report("admissibility", t, admissibility(&two_region));
            let _ = std::fs::remove_dir_all(&two_region.out);
        }
        Err(e) => {
            for name in ["scheme contraction", "finite-states trend", "admissibility"] {
                report(name, t, Err(format!("two-region run failed: {e}")));
            }
        }
    }

    let t = Instant::now();
    report("chi feasibility boundary", t, chi_feasibility());
    let t = Instant::now();
    report("sampling affine rank", t, affine_rank());

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
