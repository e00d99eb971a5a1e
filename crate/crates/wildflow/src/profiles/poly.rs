use serde::{Deserialize, Serialize};

/// Horner evaluation of `sum c_k u^k`.
pub fn horner(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * u + a)
}

/// Value of the `order`-th derivative at `u` without allocating.
pub fn derivative_at(c: &[f64], order: usize, u: f64) -> f64 {
    let mut acc = 0.0;
    for k in (order..c.len()).rev() {
        let mut f = 1.0;
        for x in (k - order + 1)..=k {
            f *= x as f64;
        }
        acc = acc * u + c[k] * f;
    }
    acc
}

/// Coefficients of `u -> p(a u + b)`.
pub fn compose_affine(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    let mut fact = 1.0;
    let mut apow = 1.0;
    for k in 0..c.len() {
        if k > 0 {
            fact *= k as f64;
            apow *= a;
        }
        out[k] = derivative_at(c, k, b) * apow / fact;
    }
    out
}

/// Antiderivative vanishing at `u = 0`.
pub fn antiderivative(c: &[f64]) -> Vec<f64> {
    std::iter::once(0.0).chain(c.iter().enumerate().map(|(k, &a)| a / (k as f64 + 1.0))).collect()
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Degree-13 smoothstep: 0 at 0, 1 at 1, six vanishing derivatives at both ends,
/// and `S(u) + S(1 - u) = 1`.
pub fn smoothstep_coefficients() -> Vec<f64> {
    let mut c = vec![0.0; 14];
    for k in 0..=6 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[7 + k] = sign * binom(6 + k, k) * binom(13, 6 - k);
    }
    c
}

/// One polynomial piece on `[left, left + width)`, in the local variable
/// `u = (s - left) / width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub left: f64,
    pub width: f64,
    pub coef: Vec<f64>,
}

impl Piece {
    pub fn constant(left: f64, width: f64, value: f64) -> Self {
        Self { left, width, coef: vec![value] }
    }

    /// `order`-th derivative with respect to `s` at local coordinate `u`.
    pub fn deriv_local(&self, order: usize, u: f64) -> f64 {
        derivative_at(&self.coef, order, u) / self.width.powi(order as i32)
    }

    pub fn integral(&self) -> f64 {
        self.width * horner(&antiderivative(&self.coef), 1.0)
    }
}

/// Piecewise polynomial on `[start, end)` with contiguous pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    pub pieces: Vec<Piece>,
}

impl PiecewisePoly {
    pub fn start(&self) -> f64 {
        self.pieces[0].left
    }

    pub fn end(&self) -> f64 {
        let p = self.pieces.last().unwrap();
        p.left + p.width
    }

    /// Index of the piece containing `s` (clamped to the ends).
    pub fn locate(&self, s: f64) -> usize {
        let mut lo = 0;
        let mut hi = self.pieces.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.pieces[mid].left <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    pub fn deriv(&self, s: f64, order: usize) -> f64 {
        let p = &self.pieces[self.locate(s)];
        p.deriv_local(order, (s - p.left) / p.width)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.deriv(s, 0)
    }

    pub fn integral(&self) -> f64 {
        self.pieces.iter().map(Piece::integral).sum()
    }

    /// Antiderivative starting from zero at `start()`.
    pub fn antiderivative(&self) -> Self {
        let mut acc = 0.0;
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut c: Vec<f64> = antiderivative(&p.coef).into_iter().map(|x| x * p.width).collect();
                c[0] += acc;
                acc += p.integral();
                Piece { left: p.left, width: p.width, coef: c }
            })
            .collect();
        Self { pieces }
    }

    pub fn add_constant(&mut self, v: f64) {
        for p in &mut self.pieces {
            p.coef[0] += v;
        }
    }

    pub fn scale(&mut self, v: f64) {
        for p in &mut self.pieces {
            p.coef.iter_mut().for_each(|c| *c *= v);
        }
    }

    /// Supremum of `|f^(order)|`, estimated on a dense per-piece grid.
    pub fn sup_abs(&self, order: usize) -> f64 {
        let k = 400;
        self.pieces
            .iter()
            .flat_map(|p| (0..=k).map(move |i| p.deriv_local(order, i as f64 / k as f64).abs()))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_is_symmetric_and_flat() {
        let c = smoothstep_coefficients();
        assert!((horner(&c, 1.0) - 1.0).abs() < 1e-12);
        for u in [0.1, 0.37, 0.5, 0.8] {
            assert!((horner(&c, u) + horner(&c, 1.0 - u) - 1.0).abs() < 1e-12);
        }
        for k in 1..=6 {
            assert!(derivative_at(&c, k, 0.0).abs() < 1e-9);
            assert!(derivative_at(&c, k, 1.0).abs() < 1e-6 * (1.0 + derivative_at(&c, k, 0.5).abs()));
        }
        assert!(derivative_at(&c, 7, 0.0).abs() > 1.0);
    }

    #[test]
    fn affine_composition_matches_direct_evaluation() {
        let c = vec![1.0, -2.0, 0.5, 3.0];
        let d = compose_affine(&c, 0.5, 0.25);
        for u in [0.0, 0.3, 1.0] {
            assert!((horner(&d, u) - horner(&c, 0.5 * u + 0.25)).abs() < 1e-14);
        }
    }
}
