//! Qubit-indexed operations on `2^q x 2^q` matrices.
//!
//! Qubits are numbered from 1. Qubit 1 is the most significant bit of a
//! basis index, so `kron(A, B)` places `A` on qubit 1 and `B` on qubit 2.

use alloc::format;
use alloc::vec::Vec;

use super::hermitian::{DensityMatrix, HermitianMatrix};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Number of qubits for a matrix of dimension `dim`.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

#[inline]
fn bit_position(qubit: usize, qubits: usize) -> usize {
    qubits - qubit
}

fn subsystem_mask(subsystem: &[usize], qubits: usize) -> Result<usize> {
    let mut mask = 0usize;
    for &k in subsystem {
        if k == 0 || k > qubits {
            return Err(Error::InvalidQubit { index: k, qubits });
        }
        mask |= 1 << bit_position(k, qubits);
    }
    Ok(mask)
}

/// Validates `perm` (1-based, `perm[k - 1]` is where qubit `k` goes).
fn check_permutation(perm: &[usize], qubits: usize) -> Result<()> {
    if perm.len() != qubits {
        return Err(Error::InvalidPermutation(format!(
            "expected {qubits} entries, got {}",
            perm.len()
        )));
    }
    let mut seen = 0usize;
    for &p in perm {
        if p == 0 || p > qubits || seen & (1 << (p - 1)) != 0 {
            return Err(Error::InvalidPermutation(format!("{perm:?}")));
        }
        seen |= 1 << (p - 1);
    }
    Ok(())
}

fn permute_index(index: usize, perm: &[usize], qubits: usize) -> usize {
    let mut out = 0;
    for (k, &dest) in perm.iter().enumerate() {
        let bit = (index >> bit_position(k + 1, qubits)) & 1;
        out |= bit << bit_position(dest, qubits);
    }
    out
}

/// Moves qubit `k` to position `perm[k - 1]`: returns `P m P^dagger` where
/// `P` is the induced permutation of basis states.
///
/// The result is an exact reindexing of the entries.
pub fn permute_qubits(m: &ComplexMatrix, perm: &[usize]) -> Result<ComplexMatrix> {
    let n = m.dim();
    let qubits = qubit_count(n)?;
    check_permutation(perm, qubits)?;
    let map: Vec<usize> = (0..n).map(|i| permute_index(i, perm, qubits)).collect();
    let mut out = ComplexMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Inverse of a qubit permutation in the same 1-based convention.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = alloc::vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p - 1] = k + 1;
    }
    inv
}

/// Transposes the indices of the qubits in `subsystem`, leaving the rest.
pub fn partial_transpose_matrix(m: &ComplexMatrix, subsystem: &[usize]) -> Result<ComplexMatrix> {
    let n = m.dim();
    let qubits = qubit_count(n)?;
    let mask = subsystem_mask(subsystem, qubits)?;
    let mut out = ComplexMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            // swap the subsystem bits between row and column index
            let swap = (r ^ c) & mask;
            out[(r ^ swap, c ^ swap)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// `rho^{T_A}` for `A = subsystem`. Hermitian, not necessarily positive.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: &[usize]) -> Result<HermitianMatrix> {
    let pt = partial_transpose_matrix(rho.as_matrix(), subsystem)?;
    Ok(HermitianMatrix::from_upper(&pt))
}

/// Traces out the qubits in `traced`, returning the reduced matrix on the
/// remaining qubits (kept in their original order).
pub fn partial_trace(m: &ComplexMatrix, traced: &[usize]) -> Result<ComplexMatrix> {
    let n = m.dim();
    let qubits = qubit_count(n)?;
    let mask = subsystem_mask(traced, qubits)?;
    let kept: Vec<usize> = (0..qubits).rev().filter(|b| mask & (1 << b) == 0).collect();
    let out_dim = 1usize << kept.len();
    let compress = |i: usize| -> usize {
        kept.iter().fold(0, |acc, &b| (acc << 1) | ((i >> b) & 1))
    };
    let mut out = ComplexMatrix::zeros(out_dim);
    for r in 0..n {
        for c in 0..n {
            if (r & mask) == (c & mask) {
                out[(compress(r), compress(c))] += m[(r, c)];
            }
        }
    }
    Ok(out)
}
