use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place 2-D transform of an `n x m` row-major array (`m` contiguous).
pub(crate) fn fft2(data: &mut [Complex64], n: usize, m: usize, inverse: bool) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let (row, col) = if inverse {
            (p.plan_fft_inverse(m), p.plan_fft_inverse(n))
        } else {
            (p.plan_fft_forward(m), p.plan_fft_forward(n))
        };
        row.process(data);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..m {
            for i in 0..n {
                buf[i] = data[i * m + j];
            }
            col.process(&mut buf);
            for i in 0..n {
                data[i * m + j] = buf[i];
            }
        }
    });
    if inverse {
        let s = 1.0 / (n * m) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

pub(crate) fn forward(values: &[f64], n: usize) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut c, n, n, false);
    c
}

pub(crate) fn inverse_real(mut c: Vec<Complex64>, n: usize) -> Vec<f64> {
    fft2(&mut c, n, n, true);
    c.into_iter().map(|v| v.re).collect()
}

/// Signed integer wavenumber of index `i` on an `n`-point axis.
pub(crate) fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Multipliers for one axis of a torus of period `length`.
#[derive(Debug, Clone)]
pub(crate) struct Axis {
    /// `i k` for first derivatives, zero on the Nyquist index.
    pub ik: Vec<Complex64>,
    /// `-k^2` including the Nyquist index.
    pub lap: Vec<f64>,
}

impl Axis {
    pub fn new(n: usize, length: f64) -> Self {
        let base = 2.0 * PI / length;
        let mut ik = Vec::with_capacity(n);
        let mut lap = Vec::with_capacity(n);
        for i in 0..n {
            let k = base * wavenumber(i, n) as f64;
            ik.push(if i == n / 2 { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, k) });
            lap.push(-k * k);
        }
        Self { ik, lap }
    }
}
