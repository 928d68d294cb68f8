use alloc::vec::Vec;

use super::sample::{sample, GuidanceSpec, SamplerConfig};
use super::train::Checkpoint;
use crate::error::{Error, Result};
use crate::linalg::{validate_density, DensityMatrix, HermitianMatrix};
use crate::mirror::{decode, decode_raw, DualVector};

/// Tolerance used for the validity scans of generated states.
pub const VALIDITY_TOLERANCE: f64 = 1e-10;

/// Raw model-space samples: sampler output mapped back through the
/// standardization.
pub fn sample_coordinates(
    ck: &Checkpoint,
    spec: &GuidanceSpec,
    cfg: &SamplerConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let net = ck.network()?;
    let mut y = sample(&net, spec, &ck.schedule, cfg, count, seed)?;
    ck.standardization.inverse(&mut y);
    Ok(y)
}

/// Samples and decodes through the mirror map. Every output is a valid
/// density matrix. Fails if the checkpoint was trained without the mirror.
pub fn generate_states(
    ck: &Checkpoint,
    spec: &GuidanceSpec,
    cfg: &SamplerConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<DensityMatrix>> {
    if !ck.mirror.enabled {
        return Err(Error::InvalidConfig(
            "checkpoint was trained without the mirror map; use generate_states_raw".into(),
        ));
    }
    let d = ck.arch.input_dim;
    sample_coordinates(ck, spec, cfg, count, seed)?
        .chunks_exact(d)
        .map(|row| decode(&DualVector::new(row.to_vec())?, &ck.mirror))
        .collect()
}

/// Counts from a validity scan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ValiditySummary {
    pub total: usize,
    pub valid: usize,
    /// Matrices with an eigenvalue below `-tol`.
    pub psd_violations: usize,
    /// Matrices whose trace was not positive, so could not be normalized.
    pub trace_failures: usize,
}

impl ValiditySummary {
    pub fn scan<'a>(matrices: impl IntoIterator<Item = &'a HermitianMatrix>, tol: f64) -> Self {
        let mut s = Self::default();
        for m in matrices {
            s.record(m, tol);
        }
        s
    }

    fn record(&mut self, m: &HermitianMatrix, tol: f64) {
        let r = validate_density(m.as_matrix(), tol);
        self.total += 1;
        if r.passes(tol) {
            self.valid += 1;
        }
        if !r.is_psd(tol) {
            self.psd_violations += 1;
        }
    }

    /// Fraction of scanned matrices that are not valid states.
    pub fn violation_rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (self.total - self.valid) as f64 / self.total as f64
        }
    }
}

/// Devectorized samples without the mirror map, with their validity scan.
#[derive(Clone, Debug)]
pub struct RawGeneration {
    pub matrices: Vec<HermitianMatrix>,
    pub summary: ValiditySummary,
}

/// Samples and devectorizes directly (Hermitian by construction, divided by
/// the trace when it is positive). Positivity is not enforced; the summary
/// reports how often it fails.
pub fn generate_states_raw(
    ck: &Checkpoint,
    spec: &GuidanceSpec,
    cfg: &SamplerConfig,
    count: usize,
    seed: u64,
) -> Result<RawGeneration> {
    let d = ck.arch.input_dim;
    let mut matrices = Vec::with_capacity(count);
    let mut summary = ValiditySummary::default();
    for row in sample_coordinates(ck, spec, cfg, count, seed)?.chunks_exact(d) {
        let raw = decode_raw(&DualVector::new(row.to_vec())?, &ck.mirror);
        summary.record(&raw.matrix, VALIDITY_TOLERANCE);
        if !raw.trace_positive {
            summary.trace_failures += 1;
        }
        matrices.push(raw.matrix);
    }
    Ok(RawGeneration { matrices, summary })
}
