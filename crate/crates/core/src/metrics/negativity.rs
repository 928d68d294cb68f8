use crate::error::Result;
use crate::linalg::{eigh, partial_transpose_matrix, DensityMatrix, HermitianMatrix};

/// `|sum of negative eigenvalues of rho^{T_A}|` for `A = subsystem`
/// (1-based qubit indices).
pub fn negativity(rho: &DensityMatrix, subsystem: &[usize]) -> Result<f64> {
    negativity_hermitian(rho.as_hermitian(), subsystem)
}

/// Same quantity for a Hermitian matrix that need not be a state, e.g. a raw
/// decode without the mirror map.
pub fn negativity_hermitian(m: &HermitianMatrix, subsystem: &[usize]) -> Result<f64> {
    let pt = HermitianMatrix::from_upper(&partial_transpose_matrix(m.as_matrix(), subsystem)?);
    let eig = eigh(&pt)?;
    Ok(-eig.eigenvalues.iter().filter(|&&l| l < 0.0).sum::<f64>())
}
