use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Number of independent coordinates of a state `(m, U)`: `n + n(n+1)/2 - 1`.
pub fn state_dim(n: usize) -> usize {
    n + n * (n + 1) / 2 - 1
}

/// Number of extreme points needed to enclose an interior state.
pub fn simplex_size(n: usize) -> usize {
    state_dim(n) + 1
}

/// Density and energy level that fix the constraint set `K_{rho,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintParams {
    pub rho: f64,
    pub q: f64,
}

impl ConstraintParams {
    pub fn new(rho: f64, q: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(invalid(format!("density must be positive, got {rho}")));
        }
        if !(q >= 0.0) || !q.is_finite() {
            return Err(invalid(format!("energy level must be nonnegative, got {q}")));
        }
        Ok(Self { rho, q })
    }

    /// Radius of the momentum circle, `sqrt(n rho q)`.
    pub fn momentum_radius(&self, n: usize) -> f64 {
        (n as f64 * self.rho * self.q).sqrt()
    }
}

/// A point `(m, U)` with `m` a vector and `U` symmetric and trace-free.
///
/// Internally the state is kept in isometric coordinates: the Euclidean norm of
/// [`StatePoint::coords`] equals `sqrt(|m|^2 + |U|_F^2)`. For `n = 2` these are
/// `(m1, m2, sqrt2 U11, sqrt2 U12)`; for `n = 3` the diagonal part uses the
/// orthonormal basis `diag(1,-1,0)/sqrt2`, `diag(1,1,-2)/sqrt6`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct StatePoint {
    n: usize,
    c: [f64; 8],
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    m: Vec<f64>,
    u: Vec<Vec<f64>>,
}

impl From<StatePoint> for StateRepr {
    fn from(w: StatePoint) -> Self {
        let u = w.u_matrix();
        StateRepr {
            m: w.m().to_vec(),
            u: (0..w.n).map(|i| u[i][..w.n].to_vec()).collect(),
        }
    }
}

impl TryFrom<StateRepr> for StatePoint {
    type Error = crate::error::Error;
    fn try_from(r: StateRepr) -> Result<Self> {
        let n = r.m.len();
        if r.u.len() != n || r.u.iter().any(|row| row.len() != n) {
            return Err(invalid("U must be an n x n matrix matching m"));
        }
        let mut u = [[0.0; 3]; 3];
        for i in 0..n {
            u[i][..n].copy_from_slice(&r.u[i]);
        }
        StatePoint::from_parts(n, &r.m, &u)
    }
}

impl StatePoint {
    pub fn zero(n: usize) -> Self {
        assert!(n == 2 || n == 3, "only n = 2, 3 are supported");
        Self { n, c: [0.0; 8] }
    }

    /// Planar state from `m` and the stored entries `U11`, `U12` (`U22 = -U11`).
    pub fn planar(m: [f64; 2], u11: f64, u12: f64) -> Self {
        let mut c = [0.0; 8];
        c[0] = m[0];
        c[1] = m[1];
        c[2] = SQRT2 * u11;
        c[3] = SQRT2 * u12;
        Self { n: 2, c }
    }

    /// Build from `m` and a full matrix; rejects asymmetric or traced `U`.
    pub fn from_parts(n: usize, m: &[f64], u: &[[f64; 3]; 3]) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(invalid(format!("dimension {n} not supported")));
        }
        if m.len() != n {
            return Err(invalid("momentum length does not match dimension"));
        }
        let scale = 1.0 + (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| u[i][j].abs()).fold(0.0, f64::max);
        let trace: f64 = (0..n).map(|i| u[i][i]).sum();
        if trace.abs() > 1e-12 * scale {
            return Err(invalid(format!("U must be trace-free, trace = {trace:.3e}")));
        }
        for i in 0..n {
            for j in 0..i {
                if (u[i][j] - u[j][i]).abs() > 1e-12 * scale {
                    return Err(invalid("U must be symmetric"));
                }
            }
        }
        Ok(Self::from_parts_unchecked(n, m, u))
    }

    pub(crate) fn from_parts_unchecked(n: usize, m: &[f64], u: &[[f64; 3]; 3]) -> Self {
        let mut c = [0.0; 8];
        c[..n].copy_from_slice(&m[..n]);
        if n == 2 {
            c[2] = SQRT2 * 0.5 * (u[0][0] - u[1][1]);
            c[3] = SQRT2 * u[0][1];
        } else {
            let (a, b) = (u[0][0], u[1][1]);
            c[3] = (a - b) / SQRT2;
            c[4] = (1.5f64).sqrt() * (a + b);
            c[5] = SQRT2 * u[0][1];
            c[6] = SQRT2 * u[0][2];
            c[7] = SQRT2 * u[1][2];
        }
        Self { n, c }
    }

    pub fn from_coords(n: usize, coords: &[f64]) -> Result<Self> {
        if (n != 2 && n != 3) || coords.len() != state_dim(n) {
            return Err(invalid("coordinate vector has the wrong length"));
        }
        let mut c = [0.0; 8];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self { n, c })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..state_dim(self.n)]
    }

    pub fn m(&self) -> &[f64] {
        &self.c[..self.n]
    }

    pub fn u_matrix(&self) -> [[f64; 3]; 3] {
        let mut u = [[0.0; 3]; 3];
        if self.n == 2 {
            let (a, b) = (self.c[2] / SQRT2, self.c[3] / SQRT2);
            u[0][0] = a;
            u[1][1] = -a;
            u[0][1] = b;
            u[1][0] = b;
        } else {
            let d = self.c[3] * SQRT2;
            let s = self.c[4] / (1.5f64).sqrt();
            u[0][0] = 0.5 * (s + d);
            u[1][1] = 0.5 * (s - d);
            u[2][2] = -s;
            let (x, y, z) = (self.c[5] / SQRT2, self.c[6] / SQRT2, self.c[7] / SQRT2);
            u[0][1] = x;
            u[1][0] = x;
            u[0][2] = y;
            u[2][0] = y;
            u[1][2] = z;
            u[2][1] = z;
        }
        u
    }

    /// Stored upper-triangle entries without the redundant last diagonal entry.
    pub fn u_stored(&self) -> Vec<f64> {
        let u = self.u_matrix();
        if self.n == 2 {
            vec![u[0][0], u[0][1]]
        } else {
            vec![u[0][0], u[0][1], u[0][2], u[1][1], u[1][2]]
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(other.c.iter()) {
            *a += b;
        }
        Self { n: self.n, c }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|x| *x *= s);
        Self { n: self.n, c }
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.add(&other.scale(s))
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }

    /// Rescale from `K_{rho,q}` to the unit set `K_{1,1/n}`.
    pub fn to_unit(&self, p: &ConstraintParams) -> Self {
        let n = self.n as f64;
        let mut c = self.c;
        let sm = (n * p.rho * p.q).sqrt();
        let su = n * p.q;
        for (k, x) in c.iter_mut().enumerate() {
            *x /= if k < self.n { sm } else { su };
        }
        Self { n: self.n, c }
    }

    pub fn from_unit(&self, p: &ConstraintParams) -> Self {
        let n = self.n as f64;
        let mut c = self.c;
        let sm = (n * p.rho * p.q).sqrt();
        let su = n * p.q;
        for (k, x) in c.iter_mut().enumerate() {
            *x *= if k < self.n { sm } else { su };
        }
        Self { n: self.n, c }
    }
}

/// Phase and direction `(tau, xi)` of a plane wave together with its profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveDirection {
    pub tau: f64,
    pub xi: Vec<f64>,
    pub profile: StatePoint,
}

impl WaveDirection {
    /// `tau nbar + Vbar xi`, which vanishes for admissible directions.
    pub fn compatibility_defect(&self) -> f64 {
        let n = self.profile.dim();
        let m = self.profile.m();
        let u = self.profile.u_matrix();
        (0..n)
            .map(|i| {
                let v: f64 = (0..n).map(|j| u[i][j] * self.xi[j]).sum();
                (self.tau * m[i] + v).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_match_counts() {
        assert_eq!(state_dim(2), 4);
        assert_eq!(simplex_size(2), 5);
        assert_eq!(state_dim(3), 8);
        assert_eq!(simplex_size(3), 9);
    }

    #[test]
    fn isometric_norm_matches_frobenius() {
        let w = StatePoint::planar([1.0, 2.0], 0.5, -0.25);
        let expected = (1.0f64 + 4.0 + 2.0 * 0.25 + 2.0 * 0.0625).sqrt();
        assert!((w.norm() - expected).abs() < 1e-14);

        let u = [[0.3, 0.1, -0.2], [0.1, -0.5, 0.4], [-0.2, 0.4, 0.2]];
        let w3 = StatePoint::from_parts(3, &[1.0, 0.0, -1.0], &u).unwrap();
        let frob: f64 = u.iter().flatten().map(|x| x * x).sum();
        assert!((w3.norm() - (2.0 + frob).sqrt()).abs() < 1e-14);
        let back = w3.u_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert!((back[i][j] - u[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_traced_matrix() {
        let u = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]];
        assert!(StatePoint::from_parts(2, &[0.0, 0.0], &u).is_err());
    }

    #[test]
    fn json_round_trip() {
        let w = StatePoint::planar([0.1, -0.2], 0.3, 0.4);
        let s = serde_json::to_string(&w).unwrap();
        let back: StatePoint = serde_json::from_str(&s).unwrap();
        assert!(w.dist(&back) < 1e-15);
    }
}
