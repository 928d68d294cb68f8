use num_complex::Complex64;

use super::eigen::eigh;
use super::matrix::{kron, ComplexMatrix};
use crate::error::{Error, Result};

/// Complex Hermitian matrix.
///
/// Every constructor produces an exactly Hermitian matrix: the lower triangle
/// is the conjugate mirror of the upper triangle and the diagonal has zero
/// imaginary part.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::zeros(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::identity(dim),
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self {
            inner: ComplexMatrix::from_real_diag(diag),
        }
    }

    /// Keeps the upper triangle of `m` and mirrors it.
    pub fn from_upper(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let mut out = m.clone();
        for i in 0..n {
            out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                out[(j, i)] = m[(i, j)].conj();
            }
        }
        Self { inner: out }
    }

    /// Hermitian part `(m + m^dagger) / 2`, exactly Hermitian.
    pub fn hermitian_part(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        Self { inner: out }
    }

    /// Accepts `m` if its hermiticity defect is at most `tol`, then symmetrizes.
    pub fn try_new(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if !(defect <= tol) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::hermitian_part(&m))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[inline]
    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            inner: self.inner.add(&rhs.inner),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            inner: self.inner.sub(&rhs.inner),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            inner: self.inner.scale(s),
        }
    }

    /// `self + c I`.
    pub fn shift(&self, c: f64) -> Self {
        let mut inner = self.inner.clone();
        for i in 0..inner.dim() {
            inner[(i, i)].re += c;
        }
        Self { inner }
    }

    /// `u self u^dagger`, re-symmetrized.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::hermitian_part(&self.inner.conjugate_by(u))
    }
}

/// Full-rank quantum state: Hermitian, strictly positive definite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    inner: HermitianMatrix,
}

impl DensityMatrix {
    /// `I / n`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            inner: HermitianMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Wraps a matrix already known to be positive definite with unit trace.
    pub(crate) fn new_unchecked(inner: HermitianMatrix) -> Self {
        Self { inner }
    }

    /// Validates `m` at tolerance `tol` and wraps it.
    pub fn try_from_matrix(m: &ComplexMatrix, tol: f64) -> Result<Self> {
        let report = validate_density(m, tol);
        if report.hermiticity_defect > tol {
            return Err(Error::NotHermitian(report.hermiticity_defect));
        }
        if !(report.min_eigenvalue > 0.0) {
            return Err(Error::NonPositiveEigenvalue(report.min_eigenvalue));
        }
        if report.trace_defect > tol {
            return Err(Error::NonPositiveTrace(m.trace().re));
        }
        Ok(Self {
            inner: HermitianMatrix::hermitian_part(m),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[inline]
    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.inner
    }

    #[inline]
    pub fn as_matrix(&self) -> &ComplexMatrix {
        self.inner.as_matrix()
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.inner
    }

    /// Tensor product of two states.
    pub fn kron(&self, rhs: &Self) -> Self {
        let k = kron(self.as_matrix(), rhs.as_matrix());
        Self {
            inner: HermitianMatrix::hermitian_part(&k),
        }
    }

    /// `u rho u^dagger` for unitary `u`; the spectrum is unchanged.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self {
            inner: self.inner.conjugate_by(u),
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<alloc::vec::Vec<f64>> {
        Ok(eigh(&self.inner)?.eigenvalues)
    }
}

/// Divides by the trace. Requires a positive trace and a positive definite input.
pub fn normalize_trace(m: &HermitianMatrix) -> Result<DensityMatrix> {
    let tr = m.trace();
    if !(tr > 0.0) || !tr.is_finite() {
        return Err(Error::NonPositiveTrace(tr));
    }
    let min = eigh(m)?.eigenvalues[0];
    if !(min > 0.0) {
        return Err(Error::NonPositiveEigenvalue(min));
    }
    Ok(DensityMatrix::new_unchecked(m.scale(1.0 / tr)))
}

/// Scalar defects of a candidate density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityReport {
    /// Largest entrywise modulus of `m - m^dagger`.
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue of the Hermitian part of `m`.
    pub min_eigenvalue: f64,
    /// `max(|Re tr m - 1|, |Im tr m|)`.
    pub trace_defect: f64,
}

impl ValidityReport {
    /// All three defects within `tol`: the negative part of the spectrum
    /// counts as the positivity defect.
    pub fn passes(&self, tol: f64) -> bool {
        self.hermiticity_defect <= tol && self.trace_defect <= tol && self.is_psd(tol)
    }

    /// Whether the spectrum is positive semidefinite within `tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue >= -tol
    }
}

/// Reports how far `m` is from being a valid density matrix.
///
/// Never fails: a non-converged eigensolve reports a NaN minimum eigenvalue,
/// which does not pass.
pub fn validate_density(m: &ComplexMatrix, _tol: f64) -> ValidityReport {
    let tr = m.trace();
    let min_eigenvalue = match eigh(&HermitianMatrix::hermitian_part(m)) {
        Ok(e) => e.eigenvalues.first().copied().unwrap_or(f64::NAN),
        Err(_) => f64::NAN,
    };
    ValidityReport {
        hermiticity_defect: m.hermiticity_defect(),
        min_eigenvalue,
        trace_defect: (tr.re - 1.0).abs().max(tr.im.abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn normalize_scalar_division() {
        let d = normalize_trace(&HermitianMatrix::from_real_diag(&[2.0, 2.0])).unwrap();
        assert_eq!(d.as_hermitian(), &HermitianMatrix::from_real_diag(&[0.5, 0.5]));
    }

    #[test]
    fn normalize_is_idempotent_on_states() {
        let rho = DensityMatrix::maximally_mixed(4);
        let again = normalize_trace(rho.as_hermitian()).unwrap();
        assert!(again.as_matrix().distance(rho.as_matrix()) <= 1e-15);
    }

    #[test]
    fn normalize_rejects_bad_inputs() {
        assert!(matches!(
            normalize_trace(&HermitianMatrix::from_real_diag(&[-1.0, -2.0])),
            Err(Error::NonPositiveTrace(_))
        ));
        assert!(matches!(
            normalize_trace(&HermitianMatrix::from_real_diag(&[3.0, -1.0])),
            Err(Error::NonPositiveEigenvalue(_))
        ));
    }

    #[test]
    fn maximally_mixed_has_zero_defects() {
        let r = validate_density(DensityMatrix::maximally_mixed(4).as_matrix(), 1e-10);
        assert_eq!(r.hermiticity_defect, 0.0);
        assert_eq!(r.trace_defect, 0.0);
        assert_eq!(r.min_eigenvalue, 0.25);
        assert!(r.passes(1e-10));
    }

    #[test]
    fn negative_eigenvalue_is_flagged() {
        let r = validate_density(&ComplexMatrix::from_real_diag(&[1.5, -0.5]), 1e-10);
        assert_eq!(r.min_eigenvalue, -0.5);
        assert!(!r.passes(1e-10));
    }

    #[test]
    fn non_hermitian_is_flagged() {
        let mut m = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        let r = validate_density(&m, 1e-10);
        assert!((r.hermiticity_defect - 0.1).abs() < 1e-15);
        assert!(!r.passes(1e-10));
    }

    #[test]
    fn from_upper_is_exactly_hermitian() {
        let m = ComplexMatrix::from_vec(
            2,
            vec![
                Complex64::new(1.0, 0.3),
                Complex64::new(0.2, -0.7),
                Complex64::new(9.0, 9.0),
                Complex64::new(2.0, 0.0),
            ],
        )
        .unwrap();
        let h = HermitianMatrix::from_upper(&m);
        assert_eq!(h.as_matrix().hermiticity_defect(), 0.0);
        assert_eq!(h.as_matrix()[(1, 0)], Complex64::new(0.2, 0.7));
        assert_eq!(h.as_matrix()[(0, 0)].im, 0.0);
    }
}
