//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies a real Jacobi rotation to the resulting real
//! symmetric 2x2 block. Sweeps visit pivots in row-major order of the upper
//! triangle and stop once the off-diagonal Frobenius norm drops to
//! `1e-13 * ||A||_F`.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::hermitian::HermitianMatrix;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::math;

/// Relative off-diagonal threshold for convergence.
pub const JACOBI_TOLERANCE: f64 = 1e-13;
/// Maximum number of cyclic sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalues at or below this are outside the domain of the matrix log.
pub const LOG_EIGENVALUE_FLOOR: f64 = 1e-300;

/// `A = sum_i lambda_i q_i q_i^dagger` with ascending eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector for `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `sum_i f(lambda_i) q_i q_i^dagger`.
    pub fn map_spectrum(&self, mut f: impl FnMut(f64) -> f64) -> HermitianMatrix {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.with_spectrum(&values)
    }

    /// `sum_i values[i] q_i q_i^dagger`.
    pub fn with_spectrum(&self, values: &[f64]) -> HermitianMatrix {
        let q = &self.eigenvectors;
        let n = q.dim();
        assert_eq!(values.len(), n);
        let scaled = ComplexMatrix::from_fn(n, |i, j| q[(i, j)] * values[j]);
        HermitianMatrix::hermitian_part(&scaled.matmul_adjoint(q))
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.with_spectrum(&self.eigenvalues)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Deterministic for identical input bits. Ties in the eigenvalue sort keep
/// the order in which the Jacobi iteration left them on the diagonal.
pub fn eigh(m: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a: Vec<Complex64> = m.as_matrix().as_slice().to_vec();
    let mut v: Vec<Complex64> = ComplexMatrix::identity(n).into_vec();

    let norm = m.frobenius_norm();
    let threshold = JACOBI_TOLERANCE * norm;
    let mut converged = false;
    let mut off = off_diagonal_norm(&a, n);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
        off = off_diagonal_norm(&a, n);
    }
    if !converged && off > threshold {
        return Err(Error::EigenNoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
            residual: off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort: ties keep Jacobi order
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let eigenvalues = order.iter().map(|&i| a[i * n + i].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |r, c| v[r * n + order[c]]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut acc = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            acc += 2.0 * a[p * n + q].norm_sqr();
        }
    }
    math::sqrt(acc)
}

/// Annihilates `a[p][q]` with `G = diag(1, e^{-i phi}) R(c, s)` on the (p, q) plane.
fn rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = math::hypot(apq.re, apq.im);
    if mag == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    // phase with apq = mag * phase
    let phase = apq / mag;

    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_infinite() {
        0.0
    } else {
        let t = 1.0 / (theta.abs() + math::sqrt(theta * theta + 1.0));
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    if t == 0.0 {
        // pivot negligible relative to the diagonal gap
        a[p * n + q] = Complex64::new(0.0, 0.0);
        a[q * n + p] = Complex64::new(0.0, 0.0);
        return;
    }
    let c = 1.0 / math::sqrt(t * t + 1.0);
    let s = t * c;
    let ph_conj = phase.conj();

    // columns: A <- A G
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q] * ph_conj;
        a[k * n + p] = akp * c - akq * s;
        a[k * n + q] = akp * s + akq * c;
    }
    // rows: A <- G^dagger A
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k] * phase;
        a[p * n + k] = apk * c - aqk * s;
        a[q * n + k] = apk * s + aqk * c;
    }
    a[p * n + p] = Complex64::new(app - t * mag, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * mag, 0.0);
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q] * ph_conj;
        v[k * n + p] = vkp * c - vkq * s;
        v[k * n + q] = vkp * s + vkq * c;
    }
}

/// Principal matrix logarithm of a positive definite Hermitian matrix.
///
/// Eigenvalues at or below [`LOG_EIGENVALUE_FLOOR`] are rejected, never clamped.
pub fn mat_log(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = eigh(m)?;
    let min = e.eigenvalues.first().copied().unwrap_or(1.0);
    if !(min > LOG_EIGENVALUE_FLOOR) {
        return Err(Error::NonPositiveEigenvalue(min));
    }
    Ok(e.map_spectrum(math::ln))
}

/// Matrix exponential of a Hermitian matrix.
pub fn mat_exp(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    Ok(eigh(m)?.map_spectrum(math::exp))
}
