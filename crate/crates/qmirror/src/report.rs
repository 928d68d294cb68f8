//! Evaluation report JSON, observables CSV and training-log CSV.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use qmirror_core::metrics::{EvalReport, MmdEstimator, Observables};
use qmirror_core::quantum::ClassLabel;
use serde::{Deserialize, Serialize};

use crate::config::{Gate, RunConfig};

/// One gate bound that a metric exceeded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateFailure {
    pub metric: String,
    pub value: f64,
    pub bound: f64,
}

/// Serialized form of an evaluation: every [`EvalReport`] field, the gate
/// outcome and the resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub swd: f64,
    pub mswd: f64,
    pub w1: f64,
    pub energy_mmd: f64,
    pub energy_mmd_clamped: f64,
    pub negativity_w1: f64,
    pub generated_count: usize,
    pub reference_count: usize,
    pub w1_count: usize,
    pub projection_count: usize,
    pub seed: u64,
    pub isometric_scaling: bool,
    pub mmd_estimator: String,
    pub subsystem: Vec<usize>,
    pub w1_note: String,
    pub gate_failures: Vec<GateFailure>,
    pub config: BTreeMap<String, String>,
}

impl ReportFile {
    pub fn new(report: &EvalReport, gate_failures: Vec<GateFailure>, config: &RunConfig) -> Self {
        Self {
            swd: report.swd,
            mswd: report.mswd,
            w1: report.w1,
            energy_mmd: report.energy_mmd,
            energy_mmd_clamped: report.energy_mmd_clamped,
            negativity_w1: report.negativity_w1,
            generated_count: report.generated_count,
            reference_count: report.reference_count,
            w1_count: report.w1_count,
            projection_count: report.projection_count,
            seed: report.seed,
            isometric_scaling: report.isometric_scaling,
            mmd_estimator: report.mmd_estimator.name().to_string(),
            subsystem: report.subsystem.clone(),
            w1_note: report.w1_note.clone(),
            gate_failures,
            config: config.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    /// The metrics as a core report.
    pub fn to_eval_report(&self) -> anyhow::Result<EvalReport> {
        Ok(EvalReport {
            swd: self.swd,
            mswd: self.mswd,
            w1: self.w1,
            energy_mmd: self.energy_mmd,
            energy_mmd_clamped: self.energy_mmd_clamped,
            negativity_w1: self.negativity_w1,
            generated_count: self.generated_count,
            reference_count: self.reference_count,
            w1_count: self.w1_count,
            projection_count: self.projection_count,
            seed: self.seed,
            isometric_scaling: self.isometric_scaling,
            mmd_estimator: MmdEstimator::from_name(&self.mmd_estimator)
                .ok_or_else(|| anyhow::anyhow!("unknown estimator {:?}", self.mmd_estimator))?,
            subsystem: self.subsystem.clone(),
            w1_note: self.w1_note.clone(),
        })
    }

    /// The embedded configuration, parsed.
    pub fn run_config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (k, v) in &self.config {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Metrics above their configured bound.
pub fn check_gate(report: &EvalReport, gate: &Gate) -> Vec<GateFailure> {
    [
        ("swd", report.swd, gate.swd),
        ("mswd", report.mswd, gate.mswd),
        ("w1", report.w1, gate.w1),
        ("energy_mmd", report.energy_mmd_clamped, gate.energy_mmd),
        ("negativity_w1", report.negativity_w1, gate.negativity_w1),
    ]
    .into_iter()
    .filter_map(|(metric, value, bound)| {
        let bound = bound?;
        // NaN never passes
        (!(value <= bound)).then(|| GateFailure {
            metric: metric.to_string(),
            value,
            bound,
        })
    })
    .collect()
}

/// Class name for one-hot labels, `w1;w2;w3` otherwise, empty when absent.
pub fn label_text(label: Option<&ClassLabel>) -> String {
    match label {
        None => String::new(),
        Some(l) => match l.class() {
            Some(c) => c.name().to_string(),
            None => l.weights().iter().map(|w| format!("{w:?}")).collect::<Vec<_>>().join(";"),
        },
    }
}

pub const OBSERVABLE_COLUMNS: [&str; 9] = [
    "sample_id",
    "class_label",
    "eig1",
    "eig2",
    "primal_re_11",
    "primal_re_22",
    "dual_re_11",
    "dual_re_22",
    "negativity",
];

pub fn write_observables(w: impl Write, rows: &[Observables]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(OBSERVABLE_COLUMNS)?;
    for o in rows {
        out.write_record([
            o.sample_id.to_string(),
            label_text(o.label.as_ref()),
            format!("{:?}", o.eig1),
            format!("{:?}", o.eig2),
            format!("{:?}", o.primal_re_11),
            format!("{:?}", o.primal_re_22),
            format!("{:?}", o.dual_re_11),
            format!("{:?}", o.dual_re_22),
            format!("{:?}", o.negativity),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One training-log row: `loss` is the mean batch loss since the previous
/// row and `lr` the learning rate of the last step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub iteration: u64,
    pub loss: f64,
    pub lr: f64,
}

pub fn write_training_log(w: impl Write, rows: &[LogRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    if rows.is_empty() {
        out.write_record(["iteration", "loss", "lr"])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_training_log(r: impl std::io::Read) -> csv::Result<Vec<LogRow>> {
    csv::Reader::from_reader(r).deserialize().collect()
}
