//! Product, pairwise-entangled and fully entangled multi-qubit states.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::haar::{haar_unitary_lie, haar_unitary_qr, LieSamplerConfig, UnitaryMatrix};
use crate::error::{Error, Result};
use crate::linalg::{kron, permute_qubits, ComplexMatrix, DensityMatrix, HermitianMatrix};

/// Eigenvalue range of the unnormalized single-qubit spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitDistConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl Default for QubitDistConfig {
    fn default() -> Self {
        Self {
            lambda_min: 1.0,
            lambda_max: 3.0,
        }
    }
}

impl QubitDistConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min > 0.0 && self.lambda_max >= self.lambda_min && self.lambda_max.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "qubit eigenvalue range [{}, {}]",
                self.lambda_min, self.lambda_max
            )));
        }
        Ok(())
    }
}

/// Source of two-qubit Haar unitaries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UnitarySampler {
    /// Langevin dynamics on the group, one fresh chain per draw.
    #[default]
    Lie,
    /// Ginibre QR.
    Qr,
}

/// Everything that determines the state generators.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GeneratorConfig {
    pub qubit: QubitDistConfig,
    pub lie: LieSamplerConfig,
    pub unitary_sampler: UnitarySampler,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        self.qubit.validate()?;
        self.lie.validate()
    }

    /// A Haar draw on `U(n)` from the configured sampler.
    pub fn sample_unitary<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<UnitaryMatrix> {
        match self.unitary_sampler {
            UnitarySampler::Lie => haar_unitary_lie(n, &self.lie, rng),
            UnitarySampler::Qr => Ok(haar_unitary_qr(n, rng)),
        }
    }
}

/// One draw from `p_bit`: `Q diag(l1, l2) Q^dagger / (l1 + l2)` with
/// `l1, l2 ~ U[lambda_min, lambda_max]` and Haar `Q` on `U(2)`.
pub fn sample_qubit<R: Rng + ?Sized>(cfg: &QubitDistConfig, rng: &mut R) -> DensityMatrix {
    let (lo, hi) = (cfg.lambda_min, cfg.lambda_max);
    let mut draw = || if hi > lo { rng.random_range(lo..=hi) } else { lo };
    let (l1, l2) = (draw(), draw());
    let y = if l1 == l2 {
        // basis independent; skip the rotation so the result is exact
        HermitianMatrix::from_real_diag(&[l1, l2])
    } else {
        let q = haar_unitary_qr(2, rng);
        HermitianMatrix::from_real_diag(&[l1, l2]).conjugate_by(q.as_matrix())
    };
    let tr = y.trace();
    DensityMatrix::new_unchecked(y.scale(1.0 / tr))
}

/// `rho_1 (x) ... (x) rho_q` with i.i.d. single-qubit factors, qubit 1 first.
pub fn product_state<R: Rng + ?Sized>(qubits: usize, cfg: &QubitDistConfig, rng: &mut R) -> Result<DensityMatrix> {
    if qubits == 0 {
        return Err(Error::InvalidConfig("qubit count must be positive".into()));
    }
    cfg.validate()?;
    let mut rho = sample_qubit(cfg, rng);
    for _ in 1..qubits {
        rho = rho.kron(&sample_qubit(cfg, rng));
    }
    Ok(rho)
}

/// Embeds the two-qubit unitary `m` so it acts on qubits `(i, j)`.
///
/// Built as `m (x) I` with `m` on qubits 1 and 2, then relabelled so qubit 1
/// lands on `i`, qubit 2 on `j`, and the remaining qubits fill the other
/// positions in ascending order. For `(1, 2)` the relabelling is the
/// identity.
pub fn build_entangler(pair: (usize, usize), m: &UnitaryMatrix, qubits: usize) -> Result<UnitaryMatrix> {
    let (i, j) = pair;
    if !(1 <= i && i < j && j <= qubits) {
        return Err(Error::InvalidQubit {
            index: if i == 0 || i >= j { i } else { j },
            qubits,
        });
    }
    if m.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: m.dim(),
        });
    }
    let base = kron(m.as_matrix(), &ComplexMatrix::identity(1 << (qubits - 2)));
    let mut perm = Vec::with_capacity(qubits);
    perm.push(i);
    perm.push(j);
    perm.extend((1..=qubits).filter(|&k| k != i && k != j));
    Ok(UnitaryMatrix::new_unchecked(permute_qubits(&base, &perm)?))
}

/// `(1, 2), (3, 4), ...`.
pub fn pairwise_pairs(qubits: usize) -> Vec<(usize, usize)> {
    (0..qubits / 2).map(|k| (2 * k + 1, 2 * k + 2)).collect()
}

/// All `i < j` in ascending lexicographic order.
pub fn all_pairs(qubits: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 1..=qubits {
        for j in (i + 1)..=qubits {
            out.push((i, j));
        }
    }
    out
}

/// `U rho U^dagger` with `U = U_{p_1} U_{p_2} ...` in the order given.
pub fn entangle(rho: &DensityMatrix, pairs: &[(usize, usize)], unitaries: &[UnitaryMatrix]) -> Result<DensityMatrix> {
    if pairs.len() != unitaries.len() {
        return Err(Error::DimensionMismatch {
            expected: pairs.len(),
            actual: unitaries.len(),
        });
    }
    let qubits = crate::linalg::qubit_count(rho.dim())?;
    let mut u = ComplexMatrix::identity(rho.dim());
    for (&pair, m) in pairs.iter().zip(unitaries) {
        u = u.matmul(build_entangler(pair, m, qubits)?.as_matrix());
    }
    Ok(rho.conjugate_by(&u))
}

fn entangled_state<R: Rng + ?Sized>(
    qubits: usize,
    pairs: &[(usize, usize)],
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<DensityMatrix> {
    cfg.validate()?;
    let rho = product_state(qubits, &cfg.qubit, rng)?;
    let unitaries = pairs
        .iter()
        .map(|_| cfg.sample_unitary(4, rng))
        .collect::<Result<Vec<_>>>()?;
    entangle(&rho, pairs, &unitaries)
}

/// `(U_12 U_34 ...) rho_prod (U_12 U_34 ...)^dagger` with independent Haar
/// draws. The product state is drawn first from `rng`.
pub fn pairwise_state<R: Rng + ?Sized>(qubits: usize, cfg: &GeneratorConfig, rng: &mut R) -> Result<DensityMatrix> {
    if qubits == 0 || qubits % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "pairwise entanglement needs an even qubit count, got {qubits}"
        )));
    }
    entangled_state(qubits, &pairwise_pairs(qubits), cfg, rng)
}

/// `(prod_{i<j} U_ij) rho_prod (prod_{i<j} U_ij)^dagger`, pairs in ascending
/// lexicographic order. The product state is drawn first from `rng`.
pub fn fully_state<R: Rng + ?Sized>(qubits: usize, cfg: &GeneratorConfig, rng: &mut R) -> Result<DensityMatrix> {
    if qubits < 2 {
        return Err(Error::InvalidConfig(format!(
            "full entanglement needs at least two qubits, got {qubits}"
        )));
    }
    entangled_state(qubits, &all_pairs(qubits), cfg, rng)
}
