//! Numerical tolerances shared by validation checks and property tests.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Entrywise checks on constructed operators (Hermiticity, commutators).
    pub structural: f64,
    /// Checks that go through an eigensolver or a state functional.
    pub spectral: f64,
    /// Gap below which the energy basis is considered unordered.
    pub min_gap: f64,
    /// Smallest admissible eigenvalue of a relative-entropy reference.
    pub min_reference_eigenvalue: f64,
    /// Eigenvalues below this contribute 0·ln 0 = 0 to entropies.
    pub zero_population: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        structural: 1e-12,
        spectral: 1e-10,
        min_gap: 1e-12,
        min_reference_eigenvalue: 1e-14,
        zero_population: 1e-15,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
