//! Unstructured random matrices: the baseline state generator and test inputs.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::haar::haar_unitary_qr;
use crate::linalg::{ComplexMatrix, DensityMatrix, HermitianMatrix};

/// Gaussian unitary ensemble draw: `(Z + Z^dagger) / 2` for standard complex
/// Gaussian `Z`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    let z = ComplexMatrix::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    HermitianMatrix::hermitian_part(&z)
}

/// `Q diag(lambda) Q^dagger / sum(lambda)` with `lambda_i ~ U[lo, hi]` and
/// Haar `Q`. Requires `0 < lo <= hi`.
pub fn random_density<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> DensityMatrix {
    assert!(lo > 0.0 && hi >= lo, "invalid eigenvalue range [{lo}, {hi}]");
    let lambda: Vec<f64> = (0..n)
        .map(|_| if hi > lo { rng.random_range(lo..=hi) } else { lo })
        .collect();
    let q = haar_unitary_qr(n, rng);
    let y = HermitianMatrix::from_real_diag(&lambda).conjugate_by(q.as_matrix());
    let tr = y.trace();
    DensityMatrix::new_unchecked(y.scale(1.0 / tr))
}

/// The random-matrix baseline: eigenvalues uniform on `(0, 1]`, Haar
/// eigenvectors, trace-normalized.
pub fn random_density_baseline<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let lambda: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
    let q = haar_unitary_qr(n, rng);
    let y = HermitianMatrix::from_real_diag(&lambda).conjugate_by(q.as_matrix());
    let tr = y.trace();
    DensityMatrix::new_unchecked(y.scale(1.0 / tr))
}
