//! Entropic mirror map between density matrices and Hermitian matrices, and
//! the real coordinate system on Hermitian matrices.
//!
//! The potential is the negative von Neumann entropy `phi(X) = Tr(X log X)`:
//!
//! ```text
//! grad phi(X)  = I + log X        (positive definite -> Hermitian)
//! grad phi*(Y) = exp(Y - I)       (Hermitian -> positive definite)
//! ```
//!
//! Decoding finishes with trace normalization, so `Y` and `Y + cI` decode to
//! the same state. Encoding always starts from a trace-one input, which picks
//! one representative per state.
//!
//! # Vector layout
//!
//! A Hermitian `n x n` matrix maps to `n^2` reals: the `n` diagonal entries,
//! then for every upper-triangular position `(i, j)`, `i < j`, in row-major
//! order, the real part followed by the imaginary part. With
//! `isometric_scaling` the off-diagonal components carry a factor `sqrt(2)`,
//! which makes the map an isometry from the Frobenius norm to the Euclidean
//! norm. This layout defines the bytes of datasets and checkpoints.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eigh, mat_log, ComplexMatrix, DensityMatrix, HermitianMatrix};
use crate::math;

/// Encoding options fixed per dataset and model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MirrorConfig {
    /// Scale off-diagonal components by `sqrt(2)`.
    pub isometric_scaling: bool,
    /// Diffuse in the mirror (dual) space. When false, primal matrices are
    /// vectorized directly; used only for the unconstrained baseline.
    pub enabled: bool,
}

impl Default for MirrorConfig {
    fn default() -> Self {
        Self {
            isometric_scaling: true,
            enabled: true,
        }
    }
}

impl MirrorConfig {
    #[inline]
    fn off_diagonal_scale(&self) -> f64 {
        if self.isometric_scaling {
            SQRT_2
        } else {
            1.0
        }
    }
}

/// Real coordinates of a Hermitian matrix (see the module docs for the layout).
#[derive(Clone, Debug, PartialEq)]
pub struct DualVector {
    n: usize,
    values: Vec<f64>,
}

impl DualVector {
    /// Wraps `values`; the length must be a perfect square.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = exact_sqrt(values.len()).ok_or(Error::NotPerfectSquare(values.len()))?;
        Ok(Self { n, values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: alloc::vec![0.0; n * n],
        }
    }

    /// Matrix dimension `n`.
    #[inline]
    pub fn matrix_dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.values.iter().map(|v| v * v).sum())
    }
}

fn exact_sqrt(len: usize) -> Option<usize> {
    let mut n = math::sqrt(len as f64) as usize;
    while n * n > len {
        n -= 1;
    }
    while (n + 1) * (n + 1) <= len {
        n += 1;
    }
    (n * n == len).then_some(n)
}

/// `I + log X`.
pub fn to_dual(x: &DensityMatrix) -> Result<HermitianMatrix> {
    Ok(mat_log(x.as_hermitian())?.shift(1.0))
}

/// Smallest eigenvalue of a decoded state. Softmax weights below it are
/// raised to it before normalization: a trace-one dense matrix cannot carry
/// eigenvalues much below `n * f64::EPSILON`, so without the floor the
/// computed spectrum of a decoded state could dip below zero.
pub const DECODE_EIGENVALUE_FLOOR: f64 = 1e-12;

/// `exp(Y - I) / Tr exp(Y - I)`.
///
/// Evaluated as a softmax over the eigenvalues of `Y`, so large inputs do not
/// overflow, with weights floored at [`DECODE_EIGENVALUE_FLOOR`]. The output
/// is strictly positive definite for every finite `Y`, and equals the exact
/// map whenever its eigenvalues are above the floor.
pub fn to_primal(y: &HermitianMatrix) -> Result<DensityMatrix> {
    let e = eigh(y)?;
    let top = e.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::NonFiniteState { step: 0 });
    }
    let weights: Vec<f64> = e.eigenvalues.iter().map(|&w| math::exp(w - top)).collect();
    let total: f64 = weights.iter().sum();
    let floored: Vec<f64> = weights.iter().map(|w| (w / total).max(DECODE_EIGENVALUE_FLOOR)).collect();
    let total: f64 = floored.iter().sum();
    let probs: Vec<f64> = floored.iter().map(|p| p / total).collect();
    let x = e.with_spectrum(&probs);
    let tr = x.trace();
    Ok(DensityMatrix::new_unchecked(x.scale(1.0 / tr)))
}

/// Flattens a Hermitian matrix into `n^2` reals.
pub fn herm_to_vec(y: &HermitianMatrix, cfg: &MirrorConfig) -> DualVector {
    let m = y.as_matrix();
    let n = m.dim();
    let s = cfg.off_diagonal_scale();
    let mut values = Vec::with_capacity(n * n);
    values.extend((0..n).map(|i| m[(i, i)].re));
    for i in 0..n {
        for j in (i + 1)..n {
            let z = m[(i, j)];
            values.push(s * z.re);
            values.push(s * z.im);
        }
    }
    DualVector { n, values }
}

/// Inverse of [`herm_to_vec`].
pub fn vec_to_herm(v: &DualVector, cfg: &MirrorConfig) -> HermitianMatrix {
    let n = v.n;
    let s = cfg.off_diagonal_scale();
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(v.values[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            m[(i, j)] = Complex64::new(v.values[k] / s, v.values[k + 1] / s);
            k += 2;
        }
    }
    HermitianMatrix::from_upper(&m)
}

/// Like [`vec_to_herm`] for a raw slice; the length must be a perfect square.
pub fn slice_to_herm(values: &[f64], cfg: &MirrorConfig) -> Result<HermitianMatrix> {
    Ok(vec_to_herm(&DualVector::new(values.to_vec())?, cfg))
}

/// `herm_to_vec(to_dual(x))`.
pub fn encode(x: &DensityMatrix, cfg: &MirrorConfig) -> Result<DualVector> {
    Ok(herm_to_vec(&to_dual(x)?, cfg))
}

/// `to_primal(vec_to_herm(v))`. Every finite input yields a valid state.
pub fn decode(v: &DualVector, cfg: &MirrorConfig) -> Result<DensityMatrix> {
    to_primal(&vec_to_herm(v, cfg))
}

/// Coordinates used for diffusion under `cfg`: the mirror encoding, or the
/// primal matrix itself when the mirror is disabled.
pub fn encode_for_model(x: &DensityMatrix, cfg: &MirrorConfig) -> Result<DualVector> {
    if cfg.enabled {
        encode(x, cfg)
    } else {
        Ok(herm_to_vec(x.as_hermitian(), cfg))
    }
}

/// Outcome of decoding a vector without the mirror map.
#[derive(Clone, Debug)]
pub struct RawDecode {
    /// Devectorized matrix, divided by its trace when the trace is positive.
    pub matrix: HermitianMatrix,
    pub trace_positive: bool,
}

/// Devectorizes without the mirror map: Hermitian by construction, but
/// positivity is not guaranteed.
pub fn decode_raw(v: &DualVector, cfg: &MirrorConfig) -> RawDecode {
    let h = vec_to_herm(v, cfg);
    let tr = h.trace();
    if tr > 0.0 && tr.is_finite() {
        RawDecode {
            matrix: h.scale(1.0 / tr),
            trace_positive: true,
        }
    } else {
        RawDecode {
            matrix: h,
            trace_positive: false,
        }
    }
}
