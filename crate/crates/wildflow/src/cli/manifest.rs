use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// `manifest.json`: everything needed to reproduce a run and check its artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    /// The resolved configuration, overrides applied.
    pub config: RunConfig,
    pub certificates: serde_json::Value,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            walk(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

/// Hashes every file under `root` except the manifest itself.
pub fn file_entries(root: &Path) -> Result<Vec<FileEntry>> {
    let mut paths = Vec::new();
    walk(root, &mut paths)?;
    let mut out = Vec::new();
    for p in paths {
        let rel = p.strip_prefix(root).unwrap_or(&p);
        let name = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        if name == "manifest.json" {
            continue;
        }
        let bytes = fs::read(&p)?;
        out.push(FileEntry { path: name, bytes: bytes.len() as u64, sha256: sha256_hex(&bytes) });
    }
    Ok(out)
}

impl Manifest {
    /// Writes `manifest.json` and returns the sha256 of its bytes.
    pub fn write(&self, root: &Path) -> Result<String> {
        let bytes = serde_json::to_vec_pretty(self)?;
        fs::write(root.join("manifest.json"), &bytes)?;
        Ok(sha256_hex(&bytes))
    }

    pub fn read(root: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(root.join("manifest.json"))?)?)
    }
}
