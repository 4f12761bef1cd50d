//! Transverse control-field profiles and the instantaneous Hamiltonian
//! H(t) = B₀·I_z + B(t)·I_x.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::spin::SpinOperators;

/// Shape of the transverse field ramp within one adiabatic stroke.
///
/// Serialized as `"sin"` or `{"pow": n}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PulseRepr", into = "PulseRepr")]
pub enum PulseShape {
    /// `B(t) = B_start + (B_end − B_start)·sin(π t / τ)`.
    Sinusoidal,
    /// `B(t) = B_start + (B_end − B_start)·(2t / τ)ⁿ`.
    Power(f64),
}

impl PulseShape {
    pub fn power(n: f64) -> Result<Self> {
        let shape = PulseShape::Power(n);
        shape.validate()?;
        Ok(shape)
    }

    /// The four profiles exercised in the reference results.
    pub fn reference_set() -> [PulseShape; 4] {
        [PulseShape::Sinusoidal, PulseShape::Power(0.5), PulseShape::Power(1.0), PulseShape::Power(2.0)]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PulseShape::Power(n) if !(n.is_finite() && n > 0.0) => {
                Err(Error::InvalidProtocol(format!("power exponent must be positive, got {n}")))
            }
            _ => Ok(()),
        }
    }

    /// `"sin"` or `"pow"`.
    pub fn tag(&self) -> &'static str {
        match self {
            PulseShape::Sinusoidal => "sin",
            PulseShape::Power(_) => "pow",
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match *self {
            PulseShape::Sinusoidal => None,
            PulseShape::Power(n) => Some(n),
        }
    }

    /// Ramp fraction in [0, 1] at normalized stroke time `x = 2t/τ ∈ [0, 1]`.
    fn ramp(&self, x: f64) -> f64 {
        match *self {
            PulseShape::Sinusoidal => (0.5 * PI * x).sin(),
            PulseShape::Power(n) => x.powf(n),
        }
    }
}

impl fmt::Display for PulseShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PulseShape::Sinusoidal => write!(f, "sin"),
            PulseShape::Power(n) => write!(f, "pow({n})"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PulseRepr {
    Tag(String),
    Pow { pow: f64 },
}

impl TryFrom<PulseRepr> for PulseShape {
    type Error = Error;
    fn try_from(r: PulseRepr) -> Result<Self> {
        match r {
            PulseRepr::Tag(t) if t == "sin" => Ok(PulseShape::Sinusoidal),
            PulseRepr::Tag(t) => Err(Error::Config(format!("unknown pulse tag {t:?}"))),
            PulseRepr::Pow { pow } => PulseShape::power(pow),
        }
    }
}

impl From<PulseShape> for PulseRepr {
    fn from(p: PulseShape) -> Self {
        match p {
            PulseShape::Sinusoidal => PulseRepr::Tag("sin".into()),
            PulseShape::Power(pow) => PulseRepr::Pow { pow },
        }
    }
}

/// Drive of one adiabatic stroke. The stroke runs over `[0, total_tau/2]`,
/// so expansion and compression together take `total_tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldProtocol {
    pub b0: f64,
    pub b_start: f64,
    pub b_end: f64,
    pub total_tau: f64,
    pub shape: PulseShape,
}

impl FieldProtocol {
    pub fn new(b0: f64, b_start: f64, b_end: f64, total_tau: f64, shape: PulseShape) -> Result<Self> {
        let proto = Self { b0, b_start, b_end, total_tau, shape };
        proto.validate()?;
        Ok(proto)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_tau.is_finite() && self.total_tau > 0.0) {
            return Err(Error::InvalidProtocol(format!("total_tau must be positive, got {}", self.total_tau)));
        }
        if ![self.b0, self.b_start, self.b_end].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidProtocol("fields must be finite".into()));
        }
        self.shape.validate()
    }

    /// Same ramp run backwards in field space: `b_end → b_start`.
    pub fn reversed(&self) -> Self {
        Self { b_start: self.b_end, b_end: self.b_start, ..*self }
    }

    pub fn duration(&self) -> f64 {
        0.5 * self.total_tau
    }

    /// Field at `t` with no range check; callers guarantee `t ∈ [0, τ/2]`.
    pub(crate) fn field_unchecked(&self, t: f64) -> f64 {
        let x = (t / self.duration()).clamp(0.0, 1.0);
        if x == 0.0 {
            self.b_start
        } else if x == 1.0 {
            self.b_end
        } else {
            self.b_start + (self.b_end - self.b_start) * self.shape.ramp(x)
        }
    }
}

/// Transverse field B(t) of the stroke.
pub fn field_value(proto: &FieldProtocol, t: f64) -> Result<f64> {
    let half = proto.duration();
    if !(0.0..=half).contains(&t) {
        return Err(Error::TimeOutOfRange { t, half_tau: half });
    }
    Ok(proto.field_unchecked(t))
}

#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub matrix: ComplexMatrix,
    /// Adjacent-level spacing √(b0² + b²).
    pub gap: f64,
    pub b0: f64,
    pub b: f64,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// `b0·I_z + b·I_x`.
pub fn hamiltonian_at(b0: f64, b: f64, ops: &SpinOperators) -> Hamiltonian {
    let matrix = &ops.iz.scale_real(b0) + &ops.ix.scale_real(b);
    Hamiltonian { matrix, gap: b0.hypot(b), b0, b }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, eigh};
    use crate::spin::{spin_operators, SpinQuantumNumber};

    fn proto(shape: PulseShape) -> FieldProtocol {
        FieldProtocol::new(0.5, 0.5, 0.05, 10.0, shape).unwrap()
    }

    #[test]
    fn endpoints_are_exact() {
        for shape in PulseShape::reference_set() {
            let p = proto(shape);
            assert_eq!(field_value(&p, 0.0).unwrap(), 0.5);
            assert_eq!(field_value(&p, 5.0).unwrap(), 0.05);
        }
    }

    #[test]
    fn power_pulse_midpoints() {
        assert!((field_value(&proto(PulseShape::Power(1.0)), 2.5).unwrap() - 0.275).abs() < 1e-15);
        assert!((field_value(&proto(PulseShape::Power(2.0)), 2.5).unwrap() - 0.3875).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_time_is_rejected() {
        let p = proto(PulseShape::Sinusoidal);
        assert!(matches!(field_value(&p, -1e-9), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(field_value(&p, 5.0 + 1e-9), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn invalid_protocols() {
        assert!(FieldProtocol::new(0.5, 0.5, 0.05, 0.0, PulseShape::Sinusoidal).is_err());
        assert!(FieldProtocol::new(0.5, 0.5, 0.05, -2.0, PulseShape::Sinusoidal).is_err());
        assert!(FieldProtocol::new(0.5, 0.5, 0.05, 1.0, PulseShape::Power(0.0)).is_err());
        assert!(PulseShape::power(-1.0).is_err());
    }

    #[test]
    fn pulse_json_forms() {
        let shapes: Vec<PulseShape> = serde_json::from_str(r#"["sin", {"pow": 0.5}, {"pow": 2}]"#).unwrap();
        assert_eq!(shapes, vec![PulseShape::Sinusoidal, PulseShape::Power(0.5), PulseShape::Power(2.0)]);
        assert_eq!(serde_json::to_string(&PulseShape::Power(1.0)).unwrap(), r#"{"pow":1.0}"#);
        assert!(serde_json::from_str::<PulseShape>(r#""cos""#).is_err());
        assert!(serde_json::from_str::<PulseShape>(r#"{"pow": -1}"#).is_err());
    }

    #[test]
    fn ramps_stay_within_field_bounds() {
        for shape in PulseShape::reference_set() {
            for p in [proto(shape), proto(shape).reversed()] {
                let mut prev = p.b_start;
                for k in 0..=1000 {
                    let b = field_value(&p, p.duration() * k as f64 / 1000.0).unwrap();
                    assert!((0.05..=0.5).contains(&b));
                    // monotone in the direction of the ramp
                    assert!((b - prev) * (p.b_end - p.b_start) >= -1e-15);
                    prev = b;
                }
            }
        }
    }

    #[test]
    fn qubit_spectrum_and_gap() {
        let ops = spin_operators(SpinQuantumNumber::HALF);
        let h1 = hamiltonian_at(0.5, 0.5, &ops);
        let es = eigh(&h1.matrix).unwrap();
        assert!((es.eigenvalues[0] + 2f64.sqrt() / 4.0).abs() < 1e-12);
        assert!((es.eigenvalues[1] - 2f64.sqrt() / 4.0).abs() < 1e-12);
        assert!((h1.gap - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let h2 = hamiltonian_at(0.5, 0.05, &ops);
        assert!((h2.gap - 0.502493781056044).abs() < 1e-12);
    }

    #[test]
    fn longitudinal_only_field_is_diagonal() {
        for two_i in 1..=4 {
            let ops = spin_operators(SpinQuantumNumber::from_two_i(two_i).unwrap());
            let h = hamiltonian_at(0.7, 0.0, &ops);
            let off: f64 = (0..h.dim())
                .flat_map(|r| (0..h.dim()).map(move |c| (r, c)))
                .filter(|(r, c)| r != c)
                .map(|(r, c)| h.matrix[(r, c)].norm())
                .sum();
            assert_eq!(off, 0.0);
            assert_eq!(commutator(&h.matrix, &h.matrix).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn commutator_of_stroke_hamiltonians() {
        for two_i in 1..=4 {
            let ops = spin_operators(SpinQuantumNumber::from_two_i(two_i).unwrap());
            for shape in PulseShape::reference_set() {
                let p = proto(shape);
                for &(t1, t2) in &[(0.0, 5.0), (0.3, 4.1), (2.5, 1.0)] {
                    let b1 = field_value(&p, t1).unwrap();
                    let b2 = field_value(&p, t2).unwrap();
                    let c = commutator(&hamiltonian_at(p.b0, b1, &ops).matrix, &hamiltonian_at(p.b0, b2, &ops).matrix)
                        .unwrap();
                    let want = ops.iy.scale(crate::linalg::I * (-p.b0 * (b1 - b2)));
                    assert!((c - want).max_abs() < 1e-12);
                }
            }
        }
    }
}
