use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::chi::ChiCurve;
use super::pressure::{PressureLaw, SourceMatrix};
use crate::error::{Error, Result};
use crate::geometry::{hull_margin, ConstraintParams, SimplexDecomposition, StatePoint};
use crate::operators::{DeviatorField, FieldDump, ScalarField, TorusGrid, VectorField};

/// Uniform time slices `t_j = j t_end / slices`, `j = 0..=slices`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_end: f64,
    pub slices: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        (0..=self.slices).map(|j| j as f64 * self.t_end / self.slices as f64).collect()
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.slices as f64
    }
}

/// `(rho, m, U, q)` on the torus grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub time: f64,
    pub rho: ScalarField,
    pub m: VectorField,
    pub u: DeviatorField,
    pub q: ScalarField,
}

impl Slice {
    pub fn grid(&self) -> TorusGrid {
        self.rho.grid
    }

    pub fn state_at(&self, node: usize) -> StatePoint {
        StatePoint::planar([self.m.components[0][node], self.m.components[1][node]], self.u.r11[node], self.u.r12[node])
    }

    pub fn params_at(&self, node: usize) -> (f64, f64) {
        (self.rho.values[node], self.q.values[node])
    }

    /// `lambda_min(rho q I + rho U - m (x) m)` at a node.
    pub fn margin_at(&self, node: usize) -> f64 {
        let (rho, q) = self.params_at(node);
        match ConstraintParams::new(rho, q.max(0.0)) {
            Ok(p) => hull_margin(&self.state_at(node), &p),
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// How the constraint set is described on a region.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSet {
    /// The full set `K_{rho, q}` at every point.
    Full,
    /// Finitely many states of `K_{rho, q}` whose hull contains the region's value.
    Finite { decomposition: SimplexDecomposition },
    /// `q = 0`: the state is already on the constraint set.
    Inert,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionConstraint {
    pub label: u32,
    pub rho: f64,
    pub q: f64,
    pub set: ConstraintSet,
}

/// Space-time set on which the state is strict: labelled regions over a time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictRegion {
    pub labels: Vec<u32>,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    PiecewiseConstant,
    PerturbedDensity,
    PiecewiseLipschitz,
}

/// Measured properties of a built state.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BuildDiagnostics {
    /// `sup |d_t rho + div m|` over slices, with `d_t rho` analytic.
    pub continuity_residual: f64,
    /// `sup |d_t m + div U + grad(p + q) - B m|` over slices, `d_t m` analytic.
    pub momentum_residual: f64,
    /// Smallest nodal hull margin inside the strict region.
    pub min_margin: f64,
    /// Scale used to normalize residuals: `max(sup rho, sup |m|, sup |U|, sup q)`.
    pub scale: f64,
    /// Measured `sup |rho0 - rho_sharp|` and `sup |grad rho0|` (perturbed and Lipschitz builders).
    pub smallness: Option<[f64; 2]>,
    /// Decay constant with `|(rho - rho_sharp, m)| <= kappa e^{-beta t}` on the slices.
    pub kappa: Option<f64>,
    /// Largest padded-grid residual of the momentum correction.
    pub mean_residual: Option<f64>,
    /// Largest normal derivative of the cube potentials on cube faces.
    pub face_flux: Option<f64>,
    pub notes: Vec<String>,
}

/// A strict subsolution sampled on slices, with its constraint descriptors.
#[derive(Debug, Clone)]
pub struct SubsolutionState {
    pub kind: AnsatzKind,
    pub grid: TorusGrid,
    pub time: TimeGrid,
    pub slices: Vec<Slice>,
    /// Region label of every node.
    pub regions: Vec<u32>,
    pub constraints: Vec<RegionConstraint>,
    pub strict: StrictRegion,
    pub pressure: PressureLaw,
    pub source: SourceMatrix,
    pub chi: Option<ChiCurve>,
    pub psi: Option<ScalarField>,
    /// Density the state relaxes to: the global mean or the per-cube means.
    pub rho_sharp: Option<ScalarField>,
    pub diagnostics: BuildDiagnostics,
}

impl SubsolutionState {
    pub fn constraint(&self, label: u32) -> Option<&RegionConstraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    /// Smallest nodal margin over slices inside the strict region.
    pub fn strict_margin(&self) -> Result<f64> {
        let mut min = f64::INFINITY;
        for s in &self.slices {
            if s.time < self.strict.t_start || s.time > self.strict.t_end {
                continue;
            }
            for (node, label) in self.regions.iter().enumerate() {
                if !self.strict.labels.contains(label) {
                    continue;
                }
                let m = s.margin_at(node);
                if !(m > 0.0) {
                    return Err(Error::Strictness { node, time: s.time, margin: m });
                }
                min = min.min(m);
            }
        }
        Ok(min)
    }

    pub fn write_slices(&self, dir: &Path) -> Result<()> {
        write_slices(&self.slices, dir)
    }
}

/// Index file written next to the slice dumps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceIndex {
    pub resolution: usize,
    pub length: f64,
    pub times: Vec<f64>,
    pub fields: Vec<String>,
}

fn slice_name(field: &str, j: usize) -> String {
    format!("{field}_{j:04}")
}

/// Dumps every slice as `rho_JJJJ`, `m_JJJJ`, `u_JJJJ`, `q_JJJJ` plus `slices.json`.
pub fn write_slices(slices: &[Slice], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let first = slices.first().ok_or_else(|| Error::InvalidInput("no slices to write".into()))?;
    for (j, s) in slices.iter().enumerate() {
        FieldDump::scalar(&s.rho, s.time, &slice_name("rho", j)).write(dir)?;
        FieldDump::vector(&s.m, s.time, &slice_name("m", j)).write(dir)?;
        FieldDump::deviator(&s.u, s.time, &slice_name("u", j)).write(dir)?;
        FieldDump::scalar(&s.q, s.time, &slice_name("q", j)).write(dir)?;
    }
    let index = SliceIndex {
        resolution: first.grid().resolution,
        length: first.grid().length,
        times: slices.iter().map(|s| s.time).collect(),
        fields: vec!["rho".into(), "m".into(), "u".into(), "q".into()],
    };
    fs::write(dir.join("slices.json"), serde_json::to_vec_pretty(&index)?)?;
    Ok(())
}

/// Reads slices written by [`write_slices`], checking grid and time metadata.
pub fn read_slices(dir: &Path) -> Result<Vec<Slice>> {
    let index: SliceIndex = serde_json::from_slice(&fs::read(dir.join("slices.json"))?)?;
    let grid = TorusGrid::new(index.resolution, index.length)?;
    let mut out = Vec::with_capacity(index.times.len());
    for (j, &t) in index.times.iter().enumerate() {
        let load = |field: &str, comps: usize| -> Result<FieldDump> {
            let d = FieldDump::read(&dir.join(format!("{}.json", slice_name(field, j))))?;
            if d.meta.resolution != grid.resolution || d.meta.length != grid.length || d.meta.components != comps {
                return Err(Error::GridMismatch(format!("{} does not match slices.json", d.meta.name)));
            }
            if d.meta.time != t {
                return Err(Error::GridMismatch(format!("{} has time {} but the index says {t}", d.meta.name, d.meta.time)));
            }
            Ok(d)
        };
        let rho = load("rho", 1)?;
        let m = load("m", 2)?;
        let u = load("u", 3)?;
        let q = load("q", 1)?;
        out.push(Slice {
            time: t,
            rho: ScalarField { grid, values: rho.data },
            m: VectorField { grid, components: [m.component(0), m.component(1)] },
            u: DeviatorField { grid, r11: u.component(0), r12: u.component(1) },
            q: ScalarField { grid, values: q.data },
        });
    }
    Ok(out)
}
