//! Angular-momentum matrices for a single spin-I (ħ = 1).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Spin quantum number stored as the integer 2I.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct SpinQuantumNumber(u32);

impl SpinQuantumNumber {
    pub const HALF: SpinQuantumNumber = SpinQuantumNumber(1);

    pub fn from_two_i(two_i: u32) -> Result<Self> {
        if two_i == 0 {
            return Err(Error::InvalidSpin(two_i));
        }
        Ok(Self(two_i))
    }

    pub fn two_i(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// Hilbert-space dimension 2I + 1.
    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Magnetic quantum numbers I, I−1, ..., −I (the row order of `iz`).
    pub fn magnetic_numbers(self) -> impl Iterator<Item = f64> {
        let spin = self.value();
        (0..self.dim()).map(move |k| spin - k as f64)
    }
}

impl TryFrom<u32> for SpinQuantumNumber {
    type Error = Error;
    fn try_from(v: u32) -> Result<Self> {
        Self::from_two_i(v)
    }
}

impl From<SpinQuantumNumber> for u32 {
    fn from(s: SpinQuantumNumber) -> u32 {
        s.0
    }
}

impl fmt::Display for SpinQuantumNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub spin: SpinQuantumNumber,
    pub ix: ComplexMatrix,
    pub iy: ComplexMatrix,
    pub iz: ComplexMatrix,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.spin.dim()
    }
}

/// Builds I_x, I_y, I_z in the |I, m⟩ basis ordered m = I, ..., −I, from
/// the ladder elements ⟨m+1|I₊|m⟩ = √(I(I+1) − m(m+1)).
pub fn spin_operators(spin: SpinQuantumNumber) -> SpinOperators {
    let d = spin.dim();
    let s = spin.value();
    let ms: Vec<f64> = spin.magnetic_numbers().collect();

    // Row k holds m = ms[k]; I₊ maps column k+1 (m) to row k (m+1).
    let mut raise = ComplexMatrix::zeros(d);
    for k in 0..d - 1 {
        let m = ms[k + 1];
        raise[(k, k + 1)] = C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();

    let ix = (&raise + &lower).scale_real(0.5);
    let iy = (&raise - &lower).scale(C64::new(0.0, -0.5));
    let iz = ComplexMatrix::from_real_diagonal(&ms);
    SpinOperators { spin, ix, iy, iz }
}
