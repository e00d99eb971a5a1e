//! The batch pipeline behind the `wildflow` binary, driven from a bundled
//! configuration file.

use std::path::Path;

use wildflow::cli::{run, RunConfig, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/perturbed.json");
    let out = std::env::temp_dir().join("wildflow-batch-example");
    let summary = run(RunConfig::from_file(&config)?, &RunOptions { out: out.clone(), ..RunOptions::default() })?;
    for line in &summary.lines {
        println!("{line}");
    }
    println!("{} files under {}, manifest sha256 {}", summary.manifest.files.len(), out.display(), summary.manifest_sha256);
    Ok(())
}
