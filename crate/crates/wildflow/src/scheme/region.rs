use crate::ansatz::SubsolutionState;
use crate::error::{invalid, Result};
use crate::operators::TorusGrid;

/// The open space-time set `D` on which a state is strict, discretized as the
/// union of the grid cells of strict nodes times the strict time window.
///
/// Spatial cells are the squares of side `h` centered on the nodes; time cells
/// are `[t_j - dt/2, t_j + dt/2]` clipped to the window.
#[derive(Debug, Clone)]
pub struct SpaceTimeRegion {
    pub grid: TorusGrid,
    pub mask: Vec<bool>,
    pub t_start: f64,
    pub t_end: f64,
    /// The window reaches the last slice, so `t_end` is not a boundary of `D`.
    pub open_end: bool,
    times: Vec<f64>,
    dt: f64,
}

impl SpaceTimeRegion {
    pub fn strict(state: &SubsolutionState) -> Result<Self> {
        let mask: Vec<bool> = state.regions.iter().map(|l| state.strict.labels.contains(l)).collect();
        let t_end_grid = state.time.t_end;
        let t_start = state.strict.t_start.max(0.0);
        let t_end = state.strict.t_end.min(t_end_grid);
        let region = Self {
            grid: state.grid,
            mask,
            t_start,
            t_end,
            open_end: state.strict.t_end >= t_end_grid,
            times: state.time.times(),
            dt: state.time.step(),
        };
        if region.area() == 0.0 || !(t_end > t_start) {
            return Err(invalid("the strict region is empty"));
        }
        Ok(region)
    }

    pub fn area(&self) -> f64 {
        let h = self.grid.spacing();
        self.mask.iter().filter(|&&m| m).count() as f64 * h * h
    }

    pub fn measure(&self) -> f64 {
        self.area() * (self.t_end - self.t_start)
    }

    /// Time cell of slice `j` clipped to the window, if it has positive length.
    pub fn time_cell(&self, j: usize) -> Option<(f64, f64)> {
        let t = self.times[j];
        let last = *self.times.last().unwrap();
        let lo = (t - 0.5 * self.dt).max(0.0).max(self.t_start);
        let hi = (t + 0.5 * self.dt).min(last).min(self.t_end);
        (hi > lo).then_some((lo, hi))
    }

    pub fn slices(&self) -> usize {
        self.times.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn inside(&self, i: isize, j: isize) -> bool {
        let n = self.grid.resolution as isize;
        self.mask[(i.rem_euclid(n) * n + j.rem_euclid(n)) as usize]
    }

    /// Number of cell faces separating `D` from its complement.
    pub fn boundary_faces(&self) -> usize {
        let n = self.grid.resolution as isize;
        let mut count = 0;
        for i in 0..n {
            for j in 0..n {
                if self.inside(i, j) {
                    count += [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().filter(|(a, b)| !self.inside(i + a, j + b)).count();
                }
            }
        }
        count
    }

    /// `H^2` measure of the space-time boundary of `D`.
    pub fn boundary_measure(&self) -> f64 {
        let lateral = self.boundary_faces() as f64 * self.grid.spacing() * (self.t_end - self.t_start);
        let caps = if self.open_end { 1.0 } else { 2.0 };
        lateral + caps * self.area()
    }

    /// Distance from a point of the cell of `node` to the lateral boundary,
    /// exact as long as it is below one cell width. `offset` is relative to
    /// the node, in `[-h/2, h/2]^2`.
    pub fn spatial_distance(&self, node: usize, offset: [f64; 2]) -> f64 {
        let n = self.grid.resolution as isize;
        let h = self.grid.spacing();
        let (i, j) = ((node as isize) / n, (node as isize) % n);
        let mut d = f64::INFINITY;
        for a in -1..=1isize {
            for b in -1..=1isize {
                if (a, b) == (0, 0) || self.inside(i + a, j + b) {
                    continue;
                }
                let gap = |s: isize, x: f64| if s == 0 { 0.0 } else { (0.5 * h - s as f64 * x).max(0.0) };
                d = d.min(gap(a, offset[0]).hypot(gap(b, offset[1])));
            }
        }
        d
    }

    /// Distance from time `t` to the temporal boundary of the window.
    pub fn temporal_distance(&self, t: f64) -> f64 {
        let below = t - self.t_start;
        if self.open_end {
            below
        } else {
            below.min(self.t_end - t)
        }
    }
}
