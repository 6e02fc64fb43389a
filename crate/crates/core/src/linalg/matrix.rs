use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{PhaseError, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const HERMITIAN_REL_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `‖a − b‖_max`; panics on shape mismatch.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Square, finite complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(CMat);

impl ComplexMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(PhaseError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(PhaseError::InvalidArgument("empty matrix".into()));
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(PhaseError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(PhaseError::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Self::new(CMat::from_fn(rows, cols, |i, j| cr(data[i * cols + j])))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMat::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMat::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    /// Same operator expressed in a permuted basis: entry (k, l) of the
    /// result is entry (perm[k], perm[l]) of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.dim())?;
        Ok(Self(CMat::from_fn(self.dim(), self.dim(), |k, l| {
            self.0[(perm[k], perm[l])]
        })))
    }
}

impl Deref for ComplexMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

pub(crate) fn check_permutation(perm: &[usize], dim: usize) -> Result<()> {
    if perm.len() != dim {
        return Err(PhaseError::DimensionMismatch {
            expected: dim,
            actual: perm.len(),
        });
    }
    let mut seen = vec![false; dim];
    for &p in perm {
        if p >= dim || seen[p] {
            return Err(PhaseError::InvalidArgument(format!(
                "not a permutation of 0..{dim}"
            )));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Hermitian operator. Construction checks
/// `‖M − M†‖_max ≤ 1e−12 · max(1, ‖M‖_max)` and then stores the exactly
/// symmetrized matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let residual = max_abs_diff(&m, &m.adjoint());
        let bound = HERMITIAN_REL_TOL * m.max_abs().max(1.0);
        if residual > bound {
            return Err(PhaseError::NotHermitian { residual, bound });
        }
        let sym = (m.as_matrix() + m.adjoint()) * cr(0.5);
        Ok(Self(ComplexMatrix(sym)))
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(ComplexMatrix::new(m)?)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(ComplexMatrix(self.0.as_matrix() * cr(s)))
    }

    /// `self + other`; both operands are Hermitian so the sum is too.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self(ComplexMatrix(
            self.0.as_matrix() + other.0.as_matrix(),
        )))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self(ComplexMatrix(
            self.0.as_matrix() - other.0.as_matrix(),
        )))
    }

    /// Real expectation value `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &CVec) -> f64 {
        v.dotc(&(self.0.as_matrix() * v)).re
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Ok(Self(self.0.permuted(perm)?))
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(PhaseError::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }
}

impl Deref for HermitianOperator {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Unitary operator with `‖U†U − I‖_max ≤ 1e−9`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator(ComplexMatrix);

impl UnitaryOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let residual = unitarity_defect(&m);
        if residual > UNITARY_TOL {
            return Err(PhaseError::NotUnitary {
                residual,
                bound: UNITARY_TOL,
            });
        }
        Ok(Self(m))
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(ComplexMatrix::new(m)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.0)
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(PhaseError::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Self::from_matrix(self.0.as_matrix() * other.0.as_matrix())
    }

    pub fn inverse(&self) -> Self {
        Self(ComplexMatrix(self.0.adjoint()))
    }
}

impl Deref for UnitaryOperator {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

pub fn unitarity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    max_abs_diff(&(m.adjoint() * m), &CMat::identity(n, n))
}

/// Unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVec);

impl StateVector {
    /// Normalizes `v`; fails on a zero or non-finite vector.
    pub fn normalized(v: CVec) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(PhaseError::ZeroState { norm });
        }
        Ok(Self(v.unscale(norm)))
    }

    pub fn from_real(components: &[f64]) -> Result<Self> {
        Self::normalized(CVec::from_iterator(
            components.len(),
            components.iter().map(|&x| cr(x)),
        ))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(PhaseError::IndexOutOfRange { index, len: dim });
        }
        let mut v = CVec::zeros(dim);
        v[index] = cr(1.0);
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &CVec {
        &self.0
    }

    pub fn into_vector(self) -> CVec {
        self.0
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        Self(&self.0 * Complex64::from_polar(1.0, phase))
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.0.dotc(&other.0)
    }
}

impl Deref for StateVector {
    type Target = CVec;
    fn deref(&self) -> &CVec {
        &self.0
    }
}

/// Orthonormalizes the given columns with modified Gram-Schmidt (twice, for
/// stability), dropping columns whose residual norm falls below `drop_tol`.
pub fn orthonormalize(columns: &[CVec], drop_tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::with_capacity(columns.len());
    for col in columns {
        let mut v = col.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let n = v.norm();
        if n > drop_tol {
            basis.push(v.unscale(n));
        }
    }
    basis
}

/// Orthogonal projector onto the span of orthonormal `basis` vectors.
pub fn projector(basis: &[CVec], dim: usize) -> CMat {
    let mut p = CMat::zeros(dim, dim);
    for b in basis {
        p += b * b.adjoint();
    }
    p
}

/// Matrix whose columns are the given vectors.
pub fn columns_to_matrix(cols: &[CVec], dim: usize) -> CMat {
    CMat::from_fn(dim, cols.len(), |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_rectangular() {
        let m = CMat::zeros(2, 3);
        assert!(matches!(
            ComplexMatrix::new(m),
            Err(PhaseError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn rejects_nan() {
        let mut m = CMat::zeros(2, 2);
        m[(1, 0)] = c(f64::NAN, 0.0);
        assert!(matches!(
            ComplexMatrix::new(m),
            Err(PhaseError::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn hermitian_check_is_relative() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c(1e6, 0.0);
        m[(1, 0)] = c(1e6, 1e-7);
        // bound is 1e-12 · 1e6 = 1e-6
        assert!(HermitianOperator::from_matrix(m.clone()).is_ok());
        m[(1, 0)] = c(1e6, 1e-5);
        assert!(matches!(
            HermitianOperator::from_matrix(m),
            Err(PhaseError::NotHermitian { .. })
        ));
    }

    #[test]
    fn unitary_check() {
        let u = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        assert!(UnitaryOperator::from_matrix(u).is_ok());
        let not_u = CMat::from_row_slice(2, 2, &[cr(1.0), cr(1.0), cr(0.0), cr(1.0)]);
        assert!(UnitaryOperator::from_matrix(not_u).is_err());
    }

    #[test]
    fn zero_state_rejected() {
        assert!(StateVector::from_real(&[0.0, 0.0]).is_err());
        let s = StateVector::from_real(&[3.0, 4.0]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn permutation_validation() {
        let m = ComplexMatrix::identity(3);
        assert!(m.permuted(&[0, 1]).is_err());
        assert!(m.permuted(&[0, 1, 1]).is_err());
        let data = [1.0, 2.0, 3.0, 4.0];
        let m = ComplexMatrix::from_real(2, 2, &data).unwrap();
        let p = m.permuted(&[1, 0]).unwrap();
        assert_eq!(p[(0, 0)], cr(4.0));
        assert_eq!(p[(0, 1)], cr(3.0));
    }

    #[test]
    fn gram_schmidt_drops_dependent_columns() {
        let a = CVec::from_vec(vec![cr(1.0), cr(1.0), cr(0.0)]);
        let b = CVec::from_vec(vec![cr(2.0), cr(2.0), cr(0.0)]);
        let d = CVec::from_vec(vec![cr(0.0), cr(1.0), cr(1.0)]);
        let basis = orthonormalize(&[a, b, d], 1e-10);
        assert_eq!(basis.len(), 2);
        assert!(basis[0].dotc(&basis[1]).norm() < 1e-15);
    }
}
