use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::torus::{DeviatorField, ScalarField, TorusGrid, VectorField};
use crate::error::{Error, Result};

/// JSON sidecar written next to every `.bin` dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub resolution: usize,
    pub length: f64,
    pub components: usize,
    pub time: f64,
    pub name: String,
}

/// A dumped field: per-node component values, nodes row-major, components
/// interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub meta: FieldMeta,
    pub data: Vec<f64>,
}

impl FieldDump {
    pub fn from_components(grid: TorusGrid, time: f64, name: &str, comps: &[&[f64]]) -> Result<Self> {
        let nodes = grid.nodes();
        if comps.is_empty() || comps.iter().any(|c| c.len() != nodes) {
            return Err(Error::GridMismatch(format!("every component needs {nodes} values")));
        }
        let mut data = Vec::with_capacity(nodes * comps.len());
        for i in 0..nodes {
            data.extend(comps.iter().map(|c| c[i]));
        }
        Ok(Self {
            meta: FieldMeta { resolution: grid.resolution, length: grid.length, components: comps.len(), time, name: name.into() },
            data,
        })
    }

    pub fn scalar(f: &ScalarField, time: f64, name: &str) -> Self {
        Self::from_components(f.grid, time, name, &[&f.values]).expect("scalar field is consistent")
    }

    pub fn vector(f: &VectorField, time: f64, name: &str) -> Self {
        Self::from_components(f.grid, time, name, &[&f.components[0], &f.components[1]]).expect("vector field is consistent")
    }

    /// Stored as `(R11, R12, R22)`.
    pub fn deviator(f: &DeviatorField, time: f64, name: &str) -> Self {
        Self::from_components(f.grid, time, name, &[&f.r11, &f.r12, &f.r22()]).expect("deviator field is consistent")
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.meta.resolution, self.meta.length)
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(self.meta.components).copied().collect()
    }

    /// Writes `<dir>/<name>.bin` and `<dir>/<name>.json`; returns the data path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let bin = dir.join(format!("{}.bin", self.meta.name));
        let mut bytes = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(&bin, bytes)?;
        fs::write(dir.join(format!("{}.json", self.meta.name)), serde_json::to_vec_pretty(&self.meta)?)?;
        Ok(bin)
    }

    /// Reads a dump from its `.bin` or `.json` path.
    pub fn read(path: &Path) -> Result<Self> {
        let bin = path.with_extension("bin");
        let side = path.with_extension("json");
        let dump_err = |p: &Path, m: String| Error::Dump { path: p.display().to_string(), message: m };
        let meta: FieldMeta = serde_json::from_slice(&fs::read(&side)?)?;
        let bytes = fs::read(&bin)?;
        let expected = meta.resolution * meta.resolution * meta.components * 8;
        if bytes.len() != expected {
            return Err(dump_err(&bin, format!("expected {expected} bytes, found {}", bytes.len())));
        }
        let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self { meta, data })
    }
}
