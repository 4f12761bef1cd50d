//! Working-fluid states and the functionals evaluated on them.
//!
//! All entropies are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix, EigenSystem, C64};
use crate::pulse::Hamiltonian;
use crate::tolerance::Tolerances;

/// Hermitian, unit-trace, positive semi-definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates against the default tolerances (1e−10 on Hermiticity,
    /// trace and negative eigenvalues).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let tol = Tolerances::DEFAULT.spectral;
        let herm = matrix.hermiticity_error();
        if herm > tol {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (error {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let lowest = eigh(&matrix)?.eigenvalues[0];
        if lowest < -tol {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {lowest:e}")));
        }
        Ok(Self(matrix.hermitian_part()))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// `|ψ⟩⟨ψ|` for the normalized `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let d = psi.len();
        Ok(Self(ComplexMatrix::from_fn(d, |r, c| psi[r] * psi[c].conj() / (norm * norm))))
    }

    /// `Σ p_k |v_k⟩⟨v_k|` over the columns of `basis`.
    pub fn from_populations(populations: &[f64], basis: &ComplexMatrix) -> Result<Self> {
        let d = populations.len();
        if basis.dim() != d {
            return Err(Error::DimensionMismatch { left: basis.dim(), right: d });
        }
        let m = ComplexMatrix::from_fn(d, |r, c| {
            (0..d).map(|k| basis[(r, k)] * populations[k] * basis[(c, k)].conj()).sum()
        });
        Self::new(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigh(&self.0)?.eigenvalues)
    }

    /// Trace-norm distance ‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.0.checked_sub(&other.0)?.trace_norm_hermitian()
    }
}

/// Bath temperature in units with k_B = 1.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BathTemperature(f64);

impl BathTemperature {
    pub fn new(t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidTemperature(t));
        }
        Ok(Self(t))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn beta(self) -> f64 {
        1.0 / self.0
    }
}

impl TryFrom<f64> for BathTemperature {
    type Error = Error;
    fn try_from(t: f64) -> Result<Self> {
        Self::new(t)
    }
}

impl From<BathTemperature> for f64 {
    fn from(t: BathTemperature) -> f64 {
        t.0
    }
}

/// Ascending eigenbasis of `h`; fails when both fields vanish and the
/// level order is ambiguous.
pub fn energy_basis(h: &Hamiltonian) -> Result<EigenSystem> {
    if h.gap < Tolerances::DEFAULT.min_gap {
        return Err(Error::DegenerateSpectrum(h.gap));
    }
    eigh(&h.matrix)
}

/// Boltzmann weights exp(−β(ε_n − ε_0)) normalized to one.
fn boltzmann_populations(energies: &[f64], beta: f64) -> Vec<f64> {
    let e0 = energies[0];
    let w: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// `exp(−H/T)/Z`, built from the eigendecomposition of `H`.
pub fn gibbs_state(h: &Hamiltonian, temp: BathTemperature) -> Result<DensityMatrix> {
    let es = eigh(&h.matrix)?;
    let pops = boltzmann_populations(&es.eigenvalues, temp.beta());
    DensityMatrix::from_populations(&pops, &es.eigenvectors)
}

/// `ln Z = ln Σ exp(−ε_n/T)`, evaluated with the ground energy factored out.
pub fn log_partition_function(h: &Hamiltonian, temp: BathTemperature) -> Result<f64> {
    let es = eigh(&h.matrix)?;
    let beta = temp.beta();
    let e0 = es.eigenvalues[0];
    let shifted: f64 = es.eigenvalues.iter().map(|e| (-beta * (e - e0)).exp()).sum();
    Ok(-beta * e0 + shifted.ln())
}

/// `Tr(ρH)`.
pub fn internal_energy(rho: &DensityMatrix, h: &Hamiltonian) -> Result<f64> {
    Ok(rho.matrix().trace_product(&h.matrix)?.re)
}

fn shannon(populations: impl IntoIterator<Item = f64>) -> f64 {
    let cutoff = Tolerances::DEFAULT.zero_population;
    populations.into_iter().filter(|&p| p > cutoff).map(|p| -p * p.ln()).sum()
}

/// `−Tr(ρ ln ρ)`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(shannon(rho.eigenvalues()?))
}

/// Occupations ⟨ε_i|ρ|ε_i⟩ of the ascending energy levels of `h`.
pub fn energy_populations(rho: &DensityMatrix, h: &Hamiltonian) -> Result<Vec<f64>> {
    energy_basis(h)?.expectation_diagonal(rho.matrix())
}

/// Shannon entropy of the energy-level occupations.
pub fn energy_entropy(rho: &DensityMatrix, h: &Hamiltonian) -> Result<f64> {
    Ok(shannon(energy_populations(rho, h)?))
}

/// Shannon entropy of the diagonal of `ρ` in an arbitrary orthonormal
/// basis.
pub fn basis_entropy(rho: &DensityMatrix, basis: &EigenSystem) -> Result<f64> {
    Ok(shannon(basis.expectation_diagonal(rho.matrix())?))
}

/// `Tr(ρ ln ρ − ρ ln σ)`; `σ` must be full rank.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    let sig = eigh(sigma.matrix())?;
    let lowest = sig.eigenvalues[0];
    if lowest <= Tolerances::DEFAULT.min_reference_eigenvalue {
        return Err(Error::SingularReference(lowest));
    }
    let neg_entropy = -von_neumann_entropy(rho)?;
    let overlaps = sig.expectation_diagonal(rho.matrix())?;
    let cross: f64 = overlaps.iter().zip(&sig.eigenvalues).map(|(p, l)| p * l.ln()).sum();
    Ok(neg_entropy - cross)
}

/// `|⟨ε_i|ρ|ε_j⟩|` with levels of `h` in ascending order.
pub fn coherence(rho: &DensityMatrix, h: &Hamiltonian, i: usize, j: usize) -> Result<f64> {
    let d = h.dim();
    for index in [i, j] {
        if index >= d {
            return Err(Error::IndexOutOfRange { index, dim: d });
        }
    }
    if i == j {
        return Err(Error::SameLevel(i));
    }
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: d });
    }
    let es = energy_basis(h)?;
    let vi = es.vector(i);
    let vj = es.vector(j);
    let m = rho.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..d {
        for c in 0..d {
            acc += vi[r].conj() * m[(r, c)] * vj[c];
        }
    }
    Ok(acc.norm())
}
