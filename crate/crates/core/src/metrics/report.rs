use alloc::string::String;
use alloc::vec::Vec;

use super::assignment::exact_w1;
use super::mmd::{energy_mmd, MmdEstimator};
use super::negativity::negativity_hermitian;
use super::wasserstein::{max_sliced_wasserstein, sliced_wasserstein, w1_1d, MswdConfig};
use crate::error::{Error, Result};
use crate::linalg::{eigh, mat_log, HermitianMatrix};
use crate::mirror::{herm_to_vec, MirrorConfig};
use crate::quantum::{ClassLabel, StateDataset};

/// Attached to every report: the full-dimensional W1 column is an empirical
/// optimal-transport cost whose sample complexity degrades with dimension.
pub const W1_CAVEAT: &str =
    "full-dimensional W1 is an exact assignment between finite batches; it suffers from the curse of dimensionality and does not vanish for independent samples of the same law";

/// Evaluation settings.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub projections: usize,
    pub mswd: MswdConfig,
    pub mmd_estimator: MmdEstimator,
    /// Largest batch for the exact assignment; larger inputs are truncated
    /// to their first `assignment_limit` rows.
    pub assignment_limit: usize,
    pub isometric_scaling: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            projections: 512,
            mswd: MswdConfig::default(),
            mmd_estimator: MmdEstimator::V,
            assignment_limit: 3000,
            isometric_scaling: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub swd: f64,
    pub mswd: f64,
    pub w1: f64,
    /// Raw estimate; may be slightly negative for the U-statistic.
    pub energy_mmd: f64,
    pub energy_mmd_clamped: f64,
    pub negativity_w1: f64,
    pub generated_count: usize,
    pub reference_count: usize,
    /// Rows per side used by the exact assignment.
    pub w1_count: usize,
    pub projection_count: usize,
    pub seed: u64,
    pub isometric_scaling: bool,
    pub mmd_estimator: MmdEstimator,
    pub subsystem: Vec<usize>,
    pub w1_note: String,
}

fn vectorize(ms: &[&HermitianMatrix], cfg: &MirrorConfig) -> Vec<f64> {
    let mut out = Vec::new();
    for m in ms {
        out.extend_from_slice(herm_to_vec(m, cfg).as_slice());
    }
    out
}

/// All five metrics between two collections of Hermitian matrices of equal
/// dimension. Generated matrices need not be states (raw decodes).
pub fn report_matrices(
    generated: &[&HermitianMatrix],
    reference: &[&HermitianMatrix],
    subsystem: &[usize],
    cfg: &EvalConfig,
    seed: u64,
) -> Result<EvalReport> {
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let n = reference[0].dim();
    if let Some(bad) = generated.iter().chain(reference).find(|m| m.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bad.dim(),
        });
    }
    let d = n * n;
    let mcfg = MirrorConfig {
        isometric_scaling: cfg.isometric_scaling,
        enabled: true,
    };
    let a = vectorize(generated, &mcfg);
    let b = vectorize(reference, &mcfg);

    let swd = sliced_wasserstein(&a, &b, d, cfg.projections, seed)?;
    let mswd = max_sliced_wasserstein(&a, &b, d, &cfg.mswd, seed)?;
    let m = generated.len().min(reference.len()).min(cfg.assignment_limit.max(1));
    let w1 = exact_w1(&a[..m * d], &b[..m * d], d)?;
    let mmd = energy_mmd(&a, &b, d, cfg.mmd_estimator)?;

    let neg = |ms: &[&HermitianMatrix]| -> Result<Vec<f64>> {
        ms.iter().map(|m| negativity_hermitian(m, subsystem)).collect()
    };
    let negativity_w1 = w1_1d(&neg(generated)?, &neg(reference)?)?;

    Ok(EvalReport {
        swd,
        mswd,
        w1,
        energy_mmd: mmd.value,
        energy_mmd_clamped: mmd.clamped,
        negativity_w1,
        generated_count: generated.len(),
        reference_count: reference.len(),
        w1_count: m,
        projection_count: cfg.projections,
        seed,
        isometric_scaling: cfg.isometric_scaling,
        mmd_estimator: cfg.mmd_estimator,
        subsystem: subsystem.to_vec(),
        w1_note: W1_CAVEAT.into(),
    })
}

/// Metrics between the primal matrices of two datasets.
pub fn full_report(
    generated: &StateDataset,
    reference: &StateDataset,
    subsystem: &[usize],
    cfg: &EvalConfig,
    seed: u64,
) -> Result<EvalReport> {
    if generated.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            expected: reference.dim(),
            actual: generated.dim(),
        });
    }
    let g: Vec<&HermitianMatrix> = generated.records.iter().map(|(_, m)| m.as_hermitian()).collect();
    let r: Vec<&HermitianMatrix> = reference.records.iter().map(|(_, m)| m.as_hermitian()).collect();
    report_matrices(&g, &r, subsystem, cfg, seed)
}

/// Per-sample quantities for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct Observables {
    pub sample_id: usize,
    pub label: Option<ClassLabel>,
    /// Largest and second largest eigenvalues.
    pub eig1: f64,
    pub eig2: f64,
    pub primal_re_11: f64,
    pub primal_re_22: f64,
    /// Entries of `I + log X`; NaN when `X` is not positive definite.
    pub dual_re_11: f64,
    pub dual_re_22: f64,
    pub negativity: f64,
}

/// Observables of one matrix.
pub fn observables(
    sample_id: usize,
    label: Option<ClassLabel>,
    m: &HermitianMatrix,
    subsystem: &[usize],
) -> Result<Observables> {
    if m.dim() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: m.dim(),
        });
    }
    let eig = eigh(m)?;
    let k = eig.eigenvalues.len();
    let (dual_re_11, dual_re_22) = match mat_log(m) {
        Ok(l) => (1.0 + l.as_matrix()[(0, 0)].re, 1.0 + l.as_matrix()[(1, 1)].re),
        Err(_) => (f64::NAN, f64::NAN),
    };
    Ok(Observables {
        sample_id,
        label,
        eig1: eig.eigenvalues[k - 1],
        eig2: eig.eigenvalues[k - 2],
        primal_re_11: m.as_matrix()[(0, 0)].re,
        primal_re_22: m.as_matrix()[(1, 1)].re,
        dual_re_11,
        dual_re_22,
        negativity: negativity_hermitian(m, subsystem)?,
    })
}

/// Observables for every record of a dataset, in record order.
pub fn dataset_observables(ds: &StateDataset, subsystem: &[usize]) -> Result<Vec<Observables>> {
    ds.records
        .iter()
        .enumerate()
        .map(|(i, (l, m))| observables(i, Some(*l), m.as_hermitian(), subsystem))
        .collect()
}

/// `w1_1d` between the `k`-th largest eigenvalues of the two collections,
/// for each `k`.
pub fn spectrum_w1(generated: &[&HermitianMatrix], reference: &[&HermitianMatrix]) -> Result<Vec<f64>> {
    let spectra = |ms: &[&HermitianMatrix]| -> Result<Vec<Vec<f64>>> {
        ms.iter()
            .map(|m| {
                let mut e = eigh(m)?.eigenvalues;
                e.reverse();
                Ok(e)
            })
            .collect()
    };
    let (g, r) = (spectra(generated)?, spectra(reference)?);
    let n = r.first().ok_or(Error::Empty("evaluation set"))?.len();
    if g.first().map(Vec::len) != Some(n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: g.first().map_or(0, Vec::len),
        });
    }
    (0..n)
        .map(|k| {
            let gk: Vec<f64> = g.iter().map(|e| e[k]).collect();
            let rk: Vec<f64> = r.iter().map(|e| e[k]).collect();
            w1_1d(&gk, &rk)
        })
        .collect()
}
