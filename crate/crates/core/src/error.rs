use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("vector length {0} is not a perfect square")]
    NotPerfectSquare(usize),

    #[error("invalid qubit index {index} for a {qubits}-qubit system")]
    InvalidQubit { index: usize, qubits: usize },

    #[error("invalid qubit permutation: {0}")]
    InvalidPermutation(String),

    #[error("eigenvalue {0:e} is at or below the log-domain floor")]
    NonPositiveEigenvalue(f64),

    #[error("trace {0:e} is not positive")]
    NonPositiveTrace(f64),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    EigenNoConvergence { sweeps: usize, residual: f64 },

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("invalid class label: {0}")]
    InvalidLabel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("time {t} outside the diffusion horizon [{t_min}, {t_max}]")]
    TimeOutOfRange { t: f64, t_min: f64, t_max: f64 },

    #[error("non-finite loss {loss} at iteration {iteration}")]
    NonFiniteLoss { iteration: u64, loss: f64 },

    #[error("non-finite sampler state at step {step}")]
    NonFiniteState { step: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
