//! Linear combinations of `h6^(j)(lambda theta) * d^beta phi` at `lambda = 1`.
//!
//! A term `(j, beta)` stands for `lambda^j h6^(j)(lambda theta) d^beta phi(x1, x2, t)`.
//! Differentiating in coordinate `k` gives `nu_k (j+1, beta) + (j, beta + e_k)`
//! where `nu = (xi_1, xi_2, tau)`. Powers of `lambda` are therefore tracked by
//! `j` alone and applied at evaluation time.

use std::sync::OnceLock;

/// Largest total order tracked for either `j` or `|beta|`.
pub const MAX_ORDER: usize = 8;

struct MultiIndex {
    list: Vec<[u8; 3]>,
    lookup: Vec<usize>,
}

fn key(b: [u8; 3]) -> usize {
    (b[0] as usize * (MAX_ORDER + 1) + b[1] as usize) * (MAX_ORDER + 1) + b[2] as usize
}

fn multi() -> &'static MultiIndex {
    static M: OnceLock<MultiIndex> = OnceLock::new();
    M.get_or_init(|| {
        let mut list = Vec::new();
        for total in 0..=MAX_ORDER as u8 {
            for a in (0..=total).rev() {
                for b in (0..=(total - a)).rev() {
                    list.push([a, b, total - a - b]);
                }
            }
        }
        let mut lookup = vec![usize::MAX; (MAX_ORDER + 1).pow(3)];
        for (i, b) in list.iter().enumerate() {
            lookup[key(*b)] = i;
        }
        MultiIndex { list, lookup }
    })
}

pub fn multi_count() -> usize {
    multi().list.len()
}

pub fn multi_index(i: usize) -> [u8; 3] {
    multi().list[i]
}

fn index_of(b: [u8; 3]) -> usize {
    multi().lookup[key(b)]
}

/// Dense coefficient table over `(j, beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    c: Vec<f64>,
}

impl Expr {
    pub fn zero() -> Self {
        Self { c: vec![0.0; (MAX_ORDER + 1) * multi_count()] }
    }

    fn slot(j: usize, b: usize) -> usize {
        j * multi_count() + b
    }

    /// `h6(lambda theta) * phi`.
    pub fn profile_times_cutoff() -> Self {
        let mut e = Self::zero();
        e.c[Self::slot(0, index_of([0, 0, 0]))] = 1.0;
        e
    }

    /// `h6(lambda theta) * d_k phi`.
    pub fn profile_times_cutoff_derivative(k: usize) -> Self {
        let mut e = Self::zero();
        let mut b = [0u8; 3];
        b[k] = 1;
        e.c[Self::slot(0, index_of(b))] = 1.0;
        e
    }

    pub fn get(&self, j: usize, beta: [u8; 3]) -> f64 {
        self.c[Self::slot(j, index_of(beta))]
    }

    /// Derivative along coordinate `k` (0, 1 spatial; 2 time).
    pub fn d(&self, k: usize, nu: &[f64; 3]) -> Self {
        let nb = multi_count();
        let mut out = Self::zero();
        for j in 0..=MAX_ORDER {
            for b in 0..nb {
                let v = self.c[Self::slot(j, b)];
                if v == 0.0 {
                    continue;
                }
                assert!(j < MAX_ORDER, "phase derivative order exceeds table");
                out.c[Self::slot(j + 1, b)] += nu[k] * v;
                let mut beta = multi_index(b);
                beta[k] += 1;
                assert!(beta.iter().map(|&x| x as usize).sum::<usize>() <= MAX_ORDER, "cutoff order exceeds table");
                out.c[Self::slot(j, index_of(beta))] += v;
            }
        }
        out
    }

    pub fn laplacian(&self, nu: &[f64; 3]) -> Self {
        self.d(0, nu).d(0, nu).add(&self.d(1, nu).d(1, nu))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self { c: self.c.iter().zip(&other.c).map(|(a, b)| a + s * b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One sparse term shared by several components.
#[derive(Debug, Clone)]
pub struct Term {
    pub j: u8,
    pub beta: [u8; 3],
    pub c: Vec<f64>,
}

/// Sparse multi-component table ready for evaluation.
#[derive(Debug, Clone)]
pub struct Table {
    pub components: usize,
    pub terms: Vec<Term>,
}

impl Table {
    pub fn from_exprs(exprs: &[Expr]) -> Self {
        let nb = multi_count();
        let mut terms = Vec::new();
        for j in 0..=MAX_ORDER {
            for b in 0..nb {
                let c: Vec<f64> = exprs.iter().map(|e| e.c[Expr::slot(j, b)]).collect();
                if c.iter().any(|&v| v != 0.0) {
                    terms.push(Term { j: j as u8, beta: multi_index(b), c });
                }
            }
        }
        Self { components: exprs.len(), terms }
    }

    /// Evaluate with `lambda^(j-6)` scaling, profile derivatives `hd[j] = h6^(j)`,
    /// and per-axis cutoff derivatives `ax[axis][order]`.
    pub fn eval(&self, lambda: f64, hd: &[f64; 8], ax: &[[f64; 8]; 3], out: &mut [f64]) {
        let mut lp = [0.0; MAX_ORDER + 1];
        let inv = 1.0 / lambda;
        let mut p = inv.powi(6);
        for v in lp.iter_mut() {
            *v = p;
            p *= lambda;
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for t in &self.terms {
            let phi = ax[0][t.beta[0] as usize] * ax[1][t.beta[1] as usize] * ax[2][t.beta[2] as usize];
            if phi == 0.0 {
                continue;
            }
            let f = lp[t.j as usize] * hd[t.j as usize] * phi;
            for (o, c) in out.iter_mut().zip(&t.c) {
                *o += c * f;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_count() {
        assert_eq!(multi_count(), 165);
        assert_eq!(multi_index(0), [0, 0, 0]);
        for i in 0..multi_count() {
            assert_eq!(index_of(multi_index(i)), i);
        }
    }

    #[test]
    fn product_rule_expansion() {
        let nu = [0.6, 0.8, -0.3];
        let e = Expr::profile_times_cutoff().d(0, &nu).d(2, &nu);
        assert!((e.get(2, [0, 0, 0]) - 0.6 * -0.3).abs() < 1e-15);
        assert!((e.get(1, [1, 0, 0]) - -0.3).abs() < 1e-15);
        assert!((e.get(1, [0, 0, 1]) - 0.6).abs() < 1e-15);
        assert!((e.get(0, [1, 0, 1]) - 1.0).abs() < 1e-15);
    }
}
