use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wildflow::cli::{run, RunConfig, RunOptions};

/// Builds, iterates and verifies subsolutions of the compressible Euler system.
#[derive(Parser, Debug)]
#[command(name = "wildflow", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `iteration.max_stages`.
    #[arg(long)]
    stages: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = RunOptions { out: args.out, seed: args.seed, stages: args.stages, threads: args.threads };
    let result = RunConfig::from_file(&args.config).map_err(Into::into).and_then(|cfg| run(cfg, &opts));
    match result {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            println!("manifest sha256 {}", summary.manifest_sha256);
            if summary.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("checks failed; see {}", opts.out.join("manifest.json").display());
                ExitCode::from(4)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
