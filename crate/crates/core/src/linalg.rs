//! Dense complex matrices and a Hermitian eigensolver sized for spin
//! operators (d of a handful).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square, row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &v) in diag.iter().enumerate() {
            m[(k, k)] = v;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &v) in diag.iter().enumerate() {
            m[(k, k)] = C64::new(v, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; fails unless `entries.len()`
    /// is a perfect square.
    pub fn from_row_major(entries: Vec<C64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(Error::NotSquare { len: entries.len() });
        }
        Ok(Self { dim, data: entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, k: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&v| v * k).collect() }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|k| self[(k, k)]).collect()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(A + A†)/2`, discarding round-off anti-Hermitian parts.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    /// Tr(A B) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        check_dims(self, other)?;
        let d = self.dim;
        let mut acc = ZERO;
        for r in 0..d {
            for k in 0..d {
                acc += self.data[r * d + k] * other.data[k * d + r];
            }
        }
        Ok(acc)
    }

    /// Sum of singular values. Both arguments to this crate's uses are
    /// Hermitian, so this is the sum of absolute eigenvalues.
    pub fn trace_norm_hermitian(&self) -> Result<f64> {
        Ok(eigh(self)?.eigenvalues.iter().map(|v| v.abs()).sum())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        let mut out = Self::zeros(self.dim);
        mul_into(self, other, &mut out);
        Ok(out)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.checked_mul(self)?.checked_mul(&u.adjoint())
    }
}

/// `ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.checked_mul(b)?.checked_sub(&b.checked_mul(a)?)
}

pub(crate) fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { left: a.dim, right: b.dim });
    }
    Ok(())
}

/// `out = a * b`; all three must share a dimension.
pub(crate) fn mul_into(a: &ComplexMatrix, b: &ComplexMatrix, out: &mut ComplexMatrix) {
    let d = a.dim;
    for r in 0..d {
        for c in 0..d {
            let mut acc = ZERO;
            for k in 0..d {
                acc += a.data[r * d + k] * b.data[k * d + c];
            }
            out.data[r * d + c] = acc;
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

// Operator forms panic on mismatched dimensions; library code goes through
// the `checked_*` variants.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs).expect("matrix dimensions must agree")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix dimensions must agree")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs).expect("matrix dimensions must agree")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let v = self[(r, c)];
                write!(f, "{:+.6e}{:+.6e}i  ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// stored as the columns of `eigenvectors`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.dim()).map(|r| self.eigenvectors[(r, k)]).collect()
    }

    /// `V f(Λ) V†` for a complex-valued spectral function.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let d = self.dim();
        let weights: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(d, |r, c| (0..d).map(|k| v[(r, k)] * weights[k] * v[(c, k)].conj()).sum())
    }

    /// `V† A V`: the matrix expressed in this eigenbasis.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_dims(a, &self.eigenvectors)?;
        let v = &self.eigenvectors;
        v.adjoint().checked_mul(a)?.checked_mul(v)
    }

    /// `⟨v_k|A|v_k⟩` for every eigenvector, real part.
    pub fn expectation_diagonal(&self, a: &ComplexMatrix) -> Result<Vec<f64>> {
        check_dims(a, &self.eigenvectors)?;
        let d = self.dim();
        let v = &self.eigenvectors;
        Ok((0..d)
            .map(|k| {
                let mut acc = ZERO;
                for r in 0..d {
                    let mut row = ZERO;
                    for c in 0..d {
                        row += a[(r, c)] * v[(c, k)];
                    }
                    acc += v[(r, k)].conj() * row;
                }
                acc.re
            })
            .collect())
    }

    /// Largest entry of `V†V − 1`.
    pub fn orthonormality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        (&v.adjoint() * v - ComplexMatrix::identity(self.dim())).max_abs()
    }
}

impl Sub<ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self - &rhs
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Eigenvalues come back ascending. Each eigenvector is phased so that its
/// largest-magnitude component is real and positive (the first such
/// component on ties within 1e-12).
pub fn eigh(a: &ComplexMatrix) -> Result<EigenSystem> {
    let d = a.dim;
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(d);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut converged = d < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|r| (0..d).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::EigenNoConvergence);
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| m[(x, x)].re.total_cmp(&m[(y, y)].re));
    let eigenvalues = order.iter().map(|&k| m[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::zeros(d);
    for (col, &k) in order.iter().enumerate() {
        let pivot = (0..d)
            .map(|r| v[(r, k)].norm())
            .enumerate()
            .fold((0, -1.0), |best, (r, n)| if n > best.1 + 1e-12 { (r, n) } else { best })
            .0;
        let phase = v[(pivot, k)].conj() / v[(pivot, k)].norm();
        for r in 0..d {
            vectors[(r, col)] = v[(r, k)] * phase;
        }
    }
    Ok(EigenSystem { eigenvalues, eigenvectors: vectors })
}

/// Annihilates `m[p][q]` with a unitary rotation in the (p, q) plane and
/// accumulates it into `v`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Phase e^{iφ} of a_pq; the rotation acts on the real problem
    // [[app, |apq|], [|apq|, aqq]] after removing it.
    let phase = apq / mag;
    let theta = 0.5 * (2.0 * mag).atan2(aqq - app);
    let (s, c) = theta.sin_cos();
    // Columns of the unitary J: J[:,p] = (c, -s e^{-iφ})ᵀ on (p, q),
    // J[:,q] = (s e^{iφ}, c)ᵀ.
    let jpp = C64::new(c, 0.0);
    let jqp = -phase.conj() * s;
    let jpq = phase * s;
    let jqq = C64::new(c, 0.0);

    let d = m.dim;
    // m ← m J
    for r in 0..d {
        let mrp = m[(r, p)];
        let mrq = m[(r, q)];
        m[(r, p)] = mrp * jpp + mrq * jqp;
        m[(r, q)] = mrp * jpq + mrq * jqq;
    }
    // m ← J† m
    for c_ in 0..d {
        let mpc = m[(p, c_)];
        let mqc = m[(q, c_)];
        m[(p, c_)] = jpp.conj() * mpc + jqp.conj() * mqc;
        m[(q, c_)] = jpq.conj() * mpc + jqq.conj() * mqc;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
    for r in 0..d {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp * jpp + vrq * jqp;
        v[(r, q)] = vrp * jpq + vrq * jqq;
    }
}

/// `exp(−i·h·t)` for Hermitian `h`.
pub fn unitary_exp(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(eigh(h)?.apply(|l| C64::from_polar(1.0, -l * t)))
}
