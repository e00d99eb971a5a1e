//! Dense two-phase simplex method with Bland's anti-cycling rule.
//!
//! Problems are in standard form: minimize `c.x` subject to `A x = b`, `x >= 0`.
//! The sizes that occur here are tiny in rows (at most ten) and moderate in
//! columns, so a full tableau is the simplest correct choice.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual multipliers of the equality rows. For an infeasible problem these
    /// are the phase-one duals, so any column `a` with `y.a > 0` would reduce
    /// the infeasibility.
    pub duals: Vec<f64>,
    /// Phase-one objective: total artificial mass left at termination.
    pub infeasibility: f64,
}

struct Tableau {
    rows: usize,
    cols: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.t[r * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.t[pr * w + pc];
        for c in 0..w {
            self.t[pr * w + c] /= p;
        }
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                for c in 0..w {
                    let v = self.t[pr * w + c];
                    self.t[r * w + c] -= f * v;
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// Run simplex iterations on the objective row (last row), allowing only
    /// columns with `allowed[c]` to enter.
    fn optimize(&mut self, allowed: &[bool], tol: f64) -> LpStatus {
        let obj = self.rows;
        for _ in 0..50_000 {
            let entering = (0..self.cols).find(|&c| allowed[c] && self.at(obj, c) < -tol);
            let Some(pc) = entering else {
                return LpStatus::Optimal;
            };
            let mut best: Option<(f64, usize)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > tol {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((ratio, r)),
                        Some((br, bi)) => {
                            if ratio < br - 1e-15 || (ratio <= br + 1e-15 && self.basis[r] < self.basis[bi]) {
                                Some((ratio, r))
                            } else {
                                Some((br, bi))
                            }
                        }
                    };
                }
            }
            match best {
                None => return LpStatus::Unbounded,
                Some((_, pr)) => self.pivot(pr, pc),
            }
        }
        LpStatus::Optimal
    }
}

/// Solve `min c.x` s.t. `A x = b`, `x >= 0`. `a` is row-major with `b.len()` rows.
pub fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64], tol: f64) -> LpSolution {
    let m = b.len();
    let n = c.len();
    let cols = n + m;
    let w = cols + 1;
    let mut sign = vec![1.0; m];
    let mut t = vec![0.0; (m + 1) * w];
    for r in 0..m {
        if b[r] < 0.0 {
            sign[r] = -1.0;
        }
        for j in 0..n {
            t[r * w + j] = sign[r] * a[r][j];
        }
        t[r * w + n + r] = 1.0;
        t[r * w + cols] = sign[r] * b[r];
    }
    // Phase one objective: sum of artificials, expressed in reduced form.
    for j in 0..=cols {
        if j >= n && j < cols {
            continue;
        }
        let s: f64 = (0..m).map(|r| t[r * w + j]).sum();
        t[m * w + j] = -s;
    }
    let mut tab = Tableau { rows: m, cols, t, basis: (n..n + m).collect() };
    let allowed_all = vec![true; cols];
    tab.optimize(&allowed_all, tol);
    let infeasibility = -tab.rhs(m);
    let phase_one_duals: Vec<f64> = (0..m).map(|r| sign[r] * (1.0 - tab.at(m, n + r))).collect();

    if infeasibility > tol.max(1e-12) {
        let x = extract(&tab, n);
        return LpSolution {
            status: LpStatus::Infeasible,
            objective: f64::NAN,
            x,
            duals: phase_one_duals,
            infeasibility,
        };
    }

    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(pc) = (0..n).find(|&j| tab.at(r, j).abs() > 1e-9) {
                tab.pivot(r, pc);
            }
        }
    }

    // Phase two objective row.
    for j in 0..=cols {
        tab.t[m * w + j] = if j < n { c[j] } else { 0.0 };
    }
    for r in 0..m {
        let bc = tab.basis[r];
        let cb = if bc < n { c[bc] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..=cols {
                let v = tab.t[r * w + j];
                tab.t[m * w + j] -= cb * v;
            }
        }
    }
    let allowed: Vec<bool> = (0..cols).map(|j| j < n).collect();
    let status = tab.optimize(&allowed, tol);
    let x = extract(&tab, n);
    let objective: f64 = x.iter().zip(c).map(|(a, b)| a * b).sum();
    let duals: Vec<f64> = (0..m).map(|r| sign[r] * (-tab.at(m, n + r))).collect();
    LpSolution { status, x, objective, duals, infeasibility }
}

fn extract(tab: &Tableau, n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for r in 0..tab.rows {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.rhs(r).max(0.0);
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_textbook_problem() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6 (slacks s1, s2)
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        let sol = solve(&a, &[4.0, 6.0], &[-1.0, -1.0, 0.0, 0.0], 1e-12);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.6).abs() < 1e-12 && (sol.x[1] - 1.2).abs() < 1e-12);
        assert!((sol.objective + 2.8).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasibility_with_separating_duals() {
        // x1 + x2 = 1, x1 + x2 = 2 cannot hold together.
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let sol = solve(&a, &[1.0, 2.0], &[0.0, 0.0], 1e-12);
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert!((sol.infeasibility - 1.0).abs() < 1e-12);
        // Every existing column must price out nonpositive.
        for j in 0..2 {
            let yj: f64 = (0..2).map(|r| sol.duals[r] * a[r][j]).sum();
            assert!(yj <= 1e-12);
        }
    }

    #[test]
    fn negative_rhs_is_normalized() {
        let a = vec![vec![1.0, -1.0]];
        let sol = solve(&a, &[-2.0], &[1.0, 1.0], 1e-12);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[1] - 2.0).abs() < 1e-12);
    }
}
