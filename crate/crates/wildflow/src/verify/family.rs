use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::profiles::PlateauCutoff;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Cos,
    Sin,
}

/// Temporal factor of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ramp {
    /// Equal to 1 near `t = 0`, vanishing from `0.9 T` on; pairs with the Cauchy data.
    Initial,
    /// Supported in `(0.1 T, 0.9 T)`.
    Interior,
}

/// `theta(t) (offset + amplitude trig(2 pi k . x / L))`.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub mode: [i32; 2],
    pub parity: Parity,
    pub ramp: Ramp,
    pub offset: f64,
    pub amplitude: f64,
    length: f64,
    time: PlateauCutoff,
}

impl TestFunction {
    pub fn label(&self) -> String {
        let p = match self.parity {
            Parity::Cos => "cos",
            Parity::Sin => "sin",
        };
        let r = match self.ramp {
            Ramp::Initial => "initial",
            Ramp::Interior => "interior",
        };
        format!("{p}({},{})-{r}", self.mode[0], self.mode[1])
    }

    fn wavevector(&self) -> [f64; 2] {
        let c = 2.0 * std::f64::consts::PI / self.length;
        [c * self.mode[0] as f64, c * self.mode[1] as f64]
    }

    /// Spatial factor and its gradient at `x`.
    pub fn spatial(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let k = self.wavevector();
        let arg = k[0] * x[0] + k[1] * x[1];
        let (s, c) = arg.sin_cos();
        let (v, d) = match self.parity {
            Parity::Cos => (c, -s),
            Parity::Sin => (s, c),
        };
        (self.offset + self.amplitude * v, [self.amplitude * d * k[0], self.amplitude * d * k[1]])
    }

    /// `theta(t)` and `theta'(t)`.
    pub fn temporal(&self, t: f64) -> [f64; 2] {
        let d = self.time.axis_derivatives(0, t);
        [d[0], d[1]]
    }

    /// Sup of all space-time derivatives up to order 2.
    pub fn c2_norm(&self) -> f64 {
        let kk = self.wavevector();
        let k = kk[0].hypot(kk[1]);
        let th = self.time.axis_sups(0);
        let s = [self.offset + self.amplitude, self.amplitude * k, self.amplitude * k * k];
        let mut best = 0.0f64;
        for i in 0..=2 {
            for j in 0..=2 - i {
                best = best.max(th[i] * s[j]);
            }
        }
        best
    }
}

/// Smooth test functions on the periodic box `T^2_L x [0, T)`.
#[derive(Debug, Clone)]
pub struct TestFunctionFamily {
    pub members: Vec<TestFunction>,
    pub length: f64,
    pub t_end: f64,
    pub nonnegative: bool,
}

impl TestFunctionFamily {
    /// `|modes| x 2 ramps x 2 parities` signed trigonometric tests.
    pub fn signed(length: f64, t_end: f64, modes: &[[i32; 2]]) -> Result<Self> {
        Self::build(length, t_end, modes, 0.0, 1.0)
    }

    /// Tests of the form `theta (1 + 0.9 trig) >= 0`.
    pub fn nonnegative(length: f64, t_end: f64, modes: &[[i32; 2]]) -> Result<Self> {
        Self::build(length, t_end, modes, 1.0, 0.9)
    }

    fn build(length: f64, t_end: f64, modes: &[[i32; 2]], offset: f64, amplitude: f64) -> Result<Self> {
        if !(length > 0.0 && t_end > 0.0) {
            return Err(invalid("test functions need a positive box"));
        }
        if modes.is_empty() || modes.iter().any(|m| *m == [0, 0]) {
            return Err(invalid("test modes must be nonempty and nonzero"));
        }
        let initial = PlateauCutoff::new(vec![0.0], vec![0.9 * t_end], 0.5)?;
        let interior = PlateauCutoff::new(vec![0.5 * t_end], vec![0.4 * t_end], 0.5)?;
        let mut members = Vec::new();
        for &mode in modes {
            for (ramp, time) in [(Ramp::Initial, &initial), (Ramp::Interior, &interior)] {
                for parity in [Parity::Cos, Parity::Sin] {
                    members.push(TestFunction { mode, parity, ramp, offset, amplitude, length, time: time.clone() });
                }
            }
        }
        Ok(Self { members, length, t_end, nonnegative: offset >= amplitude })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}
