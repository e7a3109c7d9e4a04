use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I};

/// A half-integer angular momentum, stored as 2S.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin(u32);

impl Spin {
    pub fn from_twice(twice: u32) -> Self {
        Spin(twice)
    }

    /// Accepts values whose double is integral to within 1e-9.
    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !s.is_finite() || s < 0.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidSpin(s));
        }
        Ok(Spin(twice.round() as u32))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Projection m of basis index k (k = 0 is m = S).
    pub fn m(self, k: usize) -> f64 {
        self.value() - k as f64
    }

    /// Basis index of projection m.
    pub fn index_of(self, m: f64) -> Option<usize> {
        let k = self.value() - m;
        if k < -1e-9 || (k - k.round()).abs() > 1e-9 {
            return None;
        }
        let k = k.round() as usize;
        (k < self.dim()).then_some(k)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Cartesian and ladder operators in the |S, m⟩ basis, m descending.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub splus: CMatrix,
    pub sminus: CMatrix,
}

pub fn spin_operators(spin: Spin) -> SpinOperators {
    let d = spin.dim();
    let s = spin.value();
    let mut sz = CMatrix::zeros(d, d);
    let mut splus = CMatrix::zeros(d, d);
    for k in 0..d {
        let m = spin.m(k);
        sz[(k, k)] = Complex64::new(m, 0.0);
        if k > 0 {
            // S+ |m⟩ = sqrt(S(S+1) − m(m+1)) |m+1⟩, and |m+1⟩ has index k−1
            splus[(k - 1, k)] = Complex64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let sminus = splus.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let sx = (&splus + &sminus) * half;
    let sy = (&splus - &sminus) * (half / I);
    SpinOperators {
        sx,
        sy,
        sz,
        splus,
        sminus,
    }
}
