//! Complex linear algebra for small dense Hermitian matrices.

mod eigen;
mod hermitian;
mod matrix;
mod qubits;

pub use eigen::{eigh, mat_exp, mat_log, EigenDecomposition, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE, LOG_EIGENVALUE_FLOOR};
pub use hermitian::{normalize_trace, validate_density, DensityMatrix, HermitianMatrix, ValidityReport};
pub use matrix::{kron, ComplexMatrix};
pub use qubits::{
    inverse_permutation, partial_trace, partial_transpose, partial_transpose_matrix, permute_qubits, qubit_count,
};
