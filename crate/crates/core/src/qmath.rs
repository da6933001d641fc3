//! Dense complex linear algebra for one- and two-qubit operators.
//!
//! Two-qubit states and operators use the basis order `|00>, |10>, |01>, |11>`
//! where the first label is qubit 1. Qubit 1 is therefore the *low* bit of the
//! basis index: `index = q1 + 2 * q2`. [`kron`] follows the same convention,
//! so `kron(a, b)` acts with `a` on qubit 1 and `b` on qubit 2.

use std::fmt;
use std::ops::Mul;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Tolerance used when validating Hermitian input to [`expm_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on `sum |a|^2 = 1` for normalized states.
pub const NORM_TOL: f64 = 1e-10;

/// Square complex matrix of dimension 2 or 4, stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::Dimension(format!("unsupported dimension {dim}")));
        }
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        Self::new(N, rows.iter().flatten().copied().collect()).expect("dimension must be 2 or 4")
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "unsupported dimension {dim}");
        Self { dim, entries: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        Ok(Self { dim: self.dim, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest elementwise modulus `max |a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    /// `max |(U^dagger U - I)_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim).map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Panics on dimension mismatch; use [`matmul`] for the fallible form.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        matmul(self, rhs).expect("matrix dimension mismatch")
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::Dimension(format!("{}x{} vs {}x{}", a.dim, a.dim, b.dim, b.dim)));
    }
    Ok(())
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a, b)?;
    let n = a.dim;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[(i, k)];
            if aik == ZERO {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    Ok(out)
}

/// Two-qubit tensor product with `a` acting on qubit 1 and `b` on qubit 2.
///
/// Because qubit 1 is the low bit of the basis index, the entry layout is
/// `out[(i1 + 2 i2, j1 + 2 j2)] = a[(i1, j1)] * b[(i2, j2)]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim != 2 || b.dim != 2 {
        return Err(Error::Dimension("kron expects two 2x2 operators".into()));
    }
    let mut out = ComplexMatrix::zeros(4);
    for i1 in 0..2 {
        for j1 in 0..2 {
            for i2 in 0..2 {
                for j2 in 0..2 {
                    out[(i1 + 2 * i2, j1 + 2 * j2)] = a[(i1, j1)] * b[(i2, j2)];
                }
            }
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix, reusable for many exponents.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    values: Vec<f64>,
    // columns are eigenvectors
    vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        if !h.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NotHermitian);
        }
        let n = h.dim;
        let m = DMatrix::<Complex<f64>>::from_fn(n, n, |i, j| h[(i, j)]);
        let eig = SymmetricEigen::new(m);
        let mut vectors = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                vectors[(i, j)] = eig.eigenvectors[(i, j)];
            }
        }
        Ok(Self { values: eig.eigenvalues.iter().copied().collect(), vectors })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// `exp(scale * H) = V diag(exp(scale * lambda)) V^dagger`.
    pub fn exp(&self, scale: C64) -> ComplexMatrix {
        let n = self.vectors.dim;
        let phases: Vec<C64> = self.values.iter().map(|&l| (scale * l).exp()).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n).map(|k| self.vectors[(i, k)] * phases[k] * self.vectors[(j, k)].conj()).sum();
            }
        }
        out
    }
}

/// `exp(scale * h)` for Hermitian `h`.
pub fn expm_hermitian(h: &ComplexMatrix, scale: C64) -> Result<ComplexMatrix> {
    Ok(HermitianEigen::new(h)?.exp(scale))
}

/// `|Tr(u^dagger v)| / dim`, equal to 1 iff `u = e^{i phi} v` for unitary inputs.
pub fn fidelity_up_to_global_phase(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    check_dims(u, v)?;
    let tr = matmul(&u.adjoint(), v)?.trace();
    Ok(tr.norm() / u.dim as f64)
}

pub mod pauli {
    use super::*;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows([[ZERO, -I], [I, ZERO]])
    }

    /// `|0><0| - |1><1|`.
    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_rows([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn zz() -> ComplexMatrix {
        kron(&z(), &z()).expect("2x2 operands")
    }

    pub fn yy() -> ComplexMatrix {
        kron(&y(), &y()).expect("2x2 operands")
    }
}

/// Two-qubit pure state over `|00>, |10>, |01>, |11>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: [C64; 4],
}

impl StateVector {
    /// Wraps amplitudes without checking normalization.
    pub fn from_amplitudes(amplitudes: [C64; 4]) -> Self {
        Self { amplitudes }
    }

    /// Wraps amplitudes, rejecting vectors whose norm deviates from 1.
    pub fn normalized(amplitudes: [C64; 4]) -> Result<Self> {
        let s = Self { amplitudes };
        s.require_normalized()?;
        Ok(s)
    }

    /// Computational basis state `|q1 q2>`.
    pub fn basis(q1: u8, q2: u8) -> Self {
        assert!(q1 < 2 && q2 < 2, "qubit values are 0 or 1");
        let mut amplitudes = [ZERO; 4];
        amplitudes[basis_index(q1, q2)] = ONE;
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.amplitudes
    }

    pub fn amplitude(&self, q1: u8, q2: u8) -> C64 {
        self.amplitudes[basis_index(q1, q2)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.norm_sqr()))
        }
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn renormalize(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(Self { amplitudes: self.amplitudes.map(|a| a / n) })
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.amplitudes.map(|a| a.norm_sqr())
    }

    pub fn apply(&self, op: &ComplexMatrix) -> Result<Self> {
        if op.dim() != 4 {
            return Err(Error::Dimension("two-qubit state needs a 4x4 operator".into()));
        }
        let v = op.apply(&self.amplitudes);
        Ok(Self { amplitudes: [v[0], v[1], v[2], v[3]] })
    }

    /// Euclidean distance after removing the relative global phase.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        let ov = self.inner(other);
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a * phase - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn basis_index(q1: u8, q2: u8) -> usize {
    q1 as usize + 2 * q2 as usize
}
