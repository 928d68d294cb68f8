//! The four pipeline commands as functions over in-memory artifacts. The
//! binary adds argument parsing, file IO and console output.

use anyhow::{bail, ensure, Context, Result};
use qmirror_core::diffusion::{
    generate_states, generate_states_raw, GuidanceSpec, Trainer, TrainingData, ValiditySummary, VALIDITY_TOLERANCE,
};
use qmirror_core::linalg::{DensityMatrix, HermitianMatrix};
use qmirror_core::metrics::{observables, report_matrices, Observables};
use qmirror_core::mirror::encode_for_model;
use qmirror_core::quantum::{generate_dataset, StateClass, NUM_CLASSES};

use crate::config::RunConfig;
use crate::format::{CheckpointFile, DatasetFile};
use crate::report::{check_gate, LogRow, ReportFile};

/// A generated training set and its validity scan.
pub struct GendataOutput {
    pub file: DatasetFile,
    pub class_counts: [usize; NUM_CLASSES],
    pub summary: ValiditySummary,
}

/// Generates `data.counts` records per class.
pub fn gendata(cfg: &RunConfig) -> Result<GendataOutput> {
    let d = &cfg.data;
    let mut ds = generate_dataset(d.counts, d.qubits, &d.generator, d.seed)?;
    ds.isometric_scaling = cfg.mirror.isometric_scaling;
    let file = DatasetFile::from_state_dataset(&ds, cfg);
    let mut class_counts = [0; NUM_CLASSES];
    for class in StateClass::ALL {
        class_counts[class.index()] = ds.class_states(class).len();
    }
    let summary = ValiditySummary::scan(&file.matrices, VALIDITY_TOLERANCE);
    Ok(GendataOutput {
        file,
        class_counts,
        summary,
    })
}

/// Encodes every record of `file` under the configured mirror settings.
pub fn training_data(file: &DatasetFile, cfg: &RunConfig) -> Result<TrainingData> {
    ensure!(!file.is_empty(), "training set is empty");
    ensure!(
        file.isometric_scaling == cfg.mirror.isometric_scaling,
        "dataset was written with isometric_scaling = {} but mirror.isometric_scaling = {}",
        file.isometric_scaling,
        cfg.mirror.isometric_scaling
    );
    let dim = file.dim * file.dim;
    let mut x = Vec::with_capacity(file.len() * dim);
    for (i, m) in file.matrices.iter().enumerate() {
        let rho = DensityMatrix::try_from_matrix(m.as_matrix(), VALIDITY_TOLERANCE)
            .with_context(|| format!("record {i} is not a valid state"))?;
        x.extend_from_slice(encode_for_model(&rho, &cfg.mirror)?.as_slice());
    }
    Ok(TrainingData {
        dim,
        x,
        labels: (0..file.len()).map(|i| file.label(i)).collect(),
        mirror: cfg.mirror,
    })
}

/// Trains to `train.iterations` total steps, from scratch or from `resume`.
///
/// A resumed run keeps the checkpoint's architecture, schedule, mirror and
/// training hyperparameters and produces the same checkpoint as an
/// uninterrupted run. `on_log` sees every training-log row as it is made.
pub fn train(
    cfg: &RunConfig,
    data: &DatasetFile,
    resume: Option<CheckpointFile>,
    mut on_log: impl FnMut(&LogRow),
) -> Result<(CheckpointFile, Vec<LogRow>)> {
    let mut run_cfg = cfg.clone();
    // data provenance comes from the dataset itself
    if let Ok(data_cfg) = RunConfig::parse(&data.config_text) {
        run_cfg.data = data_cfg.data;
    }
    let target = cfg.train.iterations;
    let encoded;
    let mut trainer = match resume {
        None => {
            encoded = training_data(data, &run_cfg)?;
            let arch = run_cfg.arch.for_input(encoded.dim);
            Trainer::new(&encoded, arch, run_cfg.schedule, run_cfg.train)?
        }
        Some(ck) => {
            run_cfg.mirror = ck.checkpoint.mirror;
            ensure!(
                ck.checkpoint.iterations <= target,
                "checkpoint already has {} iterations, more than the requested {target}",
                ck.checkpoint.iterations
            );
            encoded = training_data(data, &run_cfg)?;
            Trainer::resume(&encoded, ck.checkpoint)?
        }
    };
    let every = run_cfg.log_every.max(1);
    let mut rows = Vec::new();
    let (mut sum, mut n) = (0.0, 0u64);
    trainer.run(target - trainer.iterations(), |ev| {
        sum += ev.loss;
        n += 1;
        if ev.iteration % every == 0 {
            let row = LogRow {
                iteration: ev.iteration,
                loss: sum / n as f64,
                lr: ev.learning_rate,
            };
            on_log(&row);
            rows.push(row);
            (sum, n) = (0.0, 0);
        }
    })?;
    Ok((CheckpointFile::new(&run_cfg, trainer.checkpoint()), rows))
}

/// Generated states and their validity scan.
pub struct SampleOutput {
    pub file: DatasetFile,
    pub summary: ValiditySummary,
    /// Whether samples were decoded through the mirror map.
    pub mirror: bool,
}

/// Draws `sample.count` states from a checkpoint.
///
/// The decode path follows the checkpoint: mirror checkpoints decode through
/// the mirror map, checkpoints trained with `mirror.enabled = false` are
/// devectorized directly. `no_mirror` asserts the latter and is an error
/// on a mirror checkpoint.
pub fn sample(cfg: &RunConfig, ck: &CheckpointFile, no_mirror: bool) -> Result<SampleOutput> {
    let checkpoint = &ck.checkpoint;
    if no_mirror && checkpoint.mirror.enabled {
        bail!("--no-mirror needs a checkpoint trained with mirror.enabled = false");
    }
    let s = &cfg.sample;
    let spec = match s.label {
        Some(l) => GuidanceSpec::conditional(l, s.guidance),
        None => GuidanceSpec::unconditional(),
    };
    spec.validate()?;
    let sampler = s.sampler_config();
    let (matrices, summary): (Vec<HermitianMatrix>, _) = if checkpoint.mirror.enabled {
        let states = generate_states(checkpoint, &spec, &sampler, s.count, s.seed)?;
        let ms: Vec<HermitianMatrix> = states.into_iter().map(DensityMatrix::into_hermitian).collect();
        let summary = ValiditySummary::scan(&ms, VALIDITY_TOLERANCE);
        (ms, summary)
    } else {
        let raw = generate_states_raw(checkpoint, &spec, &sampler, s.count, s.seed)?;
        (raw.matrices, raw.summary)
    };
    let mut out_cfg = ck.config.clone();
    out_cfg.sample = s.clone();
    let file = DatasetFile {
        dim: checkpoint.matrix_dim(),
        labels: s.label.map(|l| vec![l; matrices.len()]),
        matrices,
        seed: s.seed,
        isometric_scaling: checkpoint.mirror.isometric_scaling,
        config_text: out_cfg.render(),
    };
    Ok(SampleOutput {
        file,
        summary,
        mirror: checkpoint.mirror.enabled,
    })
}

/// Report and per-sample observables of the generated set.
pub struct EvalOutput {
    pub report: ReportFile,
    pub observables: Vec<Observables>,
}

impl EvalOutput {
    /// True when every configured gate bound holds.
    pub fn passed(&self) -> bool {
        self.report.gate_failures.is_empty()
    }
}

/// Compares `generated` against `reference` with every metric.
pub fn eval(cfg: &RunConfig, generated: &DatasetFile, reference: &DatasetFile) -> Result<EvalOutput> {
    ensure!(
        generated.dim == reference.dim,
        "generated matrices are {0}x{0} but reference matrices are {1}x{1}",
        generated.dim,
        reference.dim
    );
    let e = &cfg.eval;
    let g: Vec<&HermitianMatrix> = generated.matrices.iter().collect();
    let r: Vec<&HermitianMatrix> = reference.matrices.iter().collect();
    let report = report_matrices(&g, &r, &e.subsystem, &e.metrics, e.seed)?;
    let failures = check_gate(&report, &e.gate);
    let observables = generated
        .matrices
        .iter()
        .enumerate()
        .map(|(i, m)| observables(i, generated.label(i), m, &e.subsystem))
        .collect::<qmirror_core::Result<Vec<_>>>()?;
    Ok(EvalOutput {
        report: ReportFile::new(&report, failures, cfg),
        observables,
    })
}
