//! Flat `key = value` run configuration.
//!
//! Keys carry a section prefix (`data.`, `lie.`, `mirror.`, `schedule.`,
//! `arch.`, `train.`, `sample.`, `eval.`). A file sets any subset, command
//! line overrides are applied on top and defaults fill the rest. The fully
//! resolved configuration is rendered canonically (fixed key order, shortest
//! round-trip floats) and embedded in every artifact.

use std::fmt::Write as _;
use std::path::Path;

use qmirror_core::diffusion::{DiffusionSchedule, OdeSolver, SamplerConfig, SamplerKind, ScoreArch, TrainConfig};
use qmirror_core::metrics::{EvalConfig, MmdEstimator};
use qmirror_core::mirror::MirrorConfig;
use qmirror_core::quantum::{ClassLabel, GeneratorConfig, UnitarySampler, NUM_CLASSES};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Score network size. Input and label widths follow from the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArchSettings {
    pub hidden_dim: usize,
    pub residual_blocks: usize,
    pub time_embed_dim: usize,
    pub norm_groups: usize,
}

impl Default for ArchSettings {
    fn default() -> Self {
        let a = ScoreArch::default();
        Self {
            hidden_dim: a.hidden_dim,
            residual_blocks: a.residual_blocks,
            time_embed_dim: a.time_embed_dim,
            norm_groups: a.norm_groups,
        }
    }
}

impl ArchSettings {
    pub fn for_input(&self, input_dim: usize) -> ScoreArch {
        ScoreArch {
            input_dim,
            hidden_dim: self.hidden_dim,
            residual_blocks: self.residual_blocks,
            time_embed_dim: self.time_embed_dim,
            label_dim: NUM_CLASSES,
            norm_groups: self.norm_groups,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataSettings {
    pub qubits: usize,
    pub counts: [usize; NUM_CLASSES],
    pub generator: GeneratorConfig,
    pub seed: u64,
}

impl Default for DataSettings {
    fn default() -> Self {
        Self {
            qubits: 2,
            counts: [100, 100, 100],
            generator: GeneratorConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerChoice {
    Sde,
    Ode,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSettings {
    pub count: usize,
    pub steps: usize,
    pub sampler: SamplerChoice,
    /// Integrator used when `sampler` is `Ode`.
    pub ode_solver: OdeSolver,
    pub chunk_size: usize,
    pub guidance: f64,
    pub label: Option<ClassLabel>,
    pub seed: u64,
}

impl Default for SampleSettings {
    fn default() -> Self {
        let s = SamplerConfig::default();
        Self {
            count: 1000,
            steps: s.steps,
            sampler: SamplerChoice::Sde,
            ode_solver: OdeSolver::Heun,
            chunk_size: s.chunk_size,
            guidance: 1.0,
            label: None,
            seed: 0,
        }
    }
}

impl SampleSettings {
    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            kind: match self.sampler {
                SamplerChoice::Sde => SamplerKind::ReverseSde,
                SamplerChoice::Ode => SamplerKind::ProbabilityFlow(self.ode_solver),
            },
            steps: self.steps,
            chunk_size: self.chunk_size,
        }
    }
}

/// Upper bounds checked by `eval`; unset bounds are not checked.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Gate {
    pub swd: Option<f64>,
    pub mswd: Option<f64>,
    pub w1: Option<f64>,
    pub energy_mmd: Option<f64>,
    pub negativity_w1: Option<f64>,
}

impl Gate {
    pub fn is_empty(&self) -> bool {
        self.swd.is_none()
            && self.mswd.is_none()
            && self.w1.is_none()
            && self.energy_mmd.is_none()
            && self.negativity_w1.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSettings {
    pub metrics: EvalConfig,
    /// 1-based qubit indices of subsystem `A` for negativity.
    pub subsystem: Vec<usize>,
    pub seed: u64,
    pub gate: Gate,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            metrics: EvalConfig::default(),
            subsystem: vec![1],
            seed: 0,
            gate: Gate::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub data: DataSettings,
    pub mirror: MirrorConfig,
    pub schedule: DiffusionSchedule,
    pub arch: ArchSettings,
    pub train: TrainConfig,
    /// Training-log interval in iterations.
    pub log_every: u64,
    pub sample: SampleSettings,
    pub eval: EvalSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: DataSettings::default(),
            mirror: MirrorConfig::default(),
            schedule: DiffusionSchedule::default(),
            arch: ArchSettings::default(),
            train: TrainConfig::default(),
            log_every: 100,
            sample: SampleSettings::default(),
            eval: EvalSettings::default(),
        }
    }
}

/// Every key, in canonical order.
pub const KEYS: &[&str] = &[
    "data.qubits",
    "data.counts",
    "data.lambda_min",
    "data.lambda_max",
    "data.unitary_sampler",
    "data.seed",
    "lie.friction",
    "lie.step_size",
    "lie.burn_in_steps",
    "lie.thinning",
    "mirror.enabled",
    "mirror.isometric_scaling",
    "schedule.t_min",
    "schedule.t_max",
    "arch.hidden_dim",
    "arch.residual_blocks",
    "arch.time_embed_dim",
    "arch.norm_groups",
    "train.batch_size",
    "train.iterations",
    "train.learning_rate",
    "train.lr_decay",
    "train.lr_decay_every",
    "train.weight_decay",
    "train.cond_dropout_prob",
    "train.seed",
    "train.standardize",
    "train.log_every",
    "sample.count",
    "sample.steps",
    "sample.sampler",
    "sample.ode_solver",
    "sample.chunk_size",
    "sample.guidance",
    "sample.label",
    "sample.seed",
    "eval.projections",
    "eval.mswd_iterations",
    "eval.mswd_step",
    "eval.mswd_restarts",
    "eval.mmd_estimator",
    "eval.assignment_limit",
    "eval.isometric_scaling",
    "eval.subsystem",
    "eval.seed",
    "eval.max_swd",
    "eval.max_mswd",
    "eval.max_w1",
    "eval.max_energy_mmd",
    "eval.max_negativity_w1",
];

fn bad(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| bad(key, value, e))
}

fn flag(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

fn bound(key: &str, value: &str) -> Result<Option<f64>, ConfigError> {
    if value == "none" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|s| num(key, s.trim())).collect()
}

/// Parses `w1,w2,w3` into a convex label, or `none`.
pub fn parse_label(value: &str) -> Result<Option<ClassLabel>, ConfigError> {
    if value == "none" {
        return Ok(None);
    }
    let w: Vec<f64> = list("sample.label", value)?;
    ClassLabel::from_slice(&w)
        .map(Some)
        .map_err(|e| bad("sample.label", value, e))
}

fn join<T: std::fmt::Debug>(xs: &[T]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:?}"))
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let g = &mut self.data.generator;
        match key {
            "data.qubits" => self.data.qubits = num(key, v)?,
            "data.counts" => {
                let c: Vec<usize> = list(key, v)?;
                self.data.counts = c
                    .try_into()
                    .map_err(|_| bad(key, v, format!("expected {NUM_CLASSES} counts")))?;
            }
            "data.lambda_min" => g.qubit.lambda_min = num(key, v)?,
            "data.lambda_max" => g.qubit.lambda_max = num(key, v)?,
            "data.unitary_sampler" => {
                g.unitary_sampler = match v {
                    "lie" => UnitarySampler::Lie,
                    "qr" => UnitarySampler::Qr,
                    _ => return Err(bad(key, v, "expected lie or qr")),
                }
            }
            "data.seed" => self.data.seed = num(key, v)?,
            "lie.friction" => g.lie.friction = num(key, v)?,
            "lie.step_size" => g.lie.step_size = num(key, v)?,
            "lie.burn_in_steps" => g.lie.burn_in_steps = num(key, v)?,
            "lie.thinning" => g.lie.thinning = num(key, v)?,
            "mirror.enabled" => self.mirror.enabled = flag(key, v)?,
            "mirror.isometric_scaling" => self.mirror.isometric_scaling = flag(key, v)?,
            "schedule.t_min" => self.schedule.t_min = num(key, v)?,
            "schedule.t_max" => self.schedule.t_max = num(key, v)?,
            "arch.hidden_dim" => self.arch.hidden_dim = num(key, v)?,
            "arch.residual_blocks" => self.arch.residual_blocks = num(key, v)?,
            "arch.time_embed_dim" => self.arch.time_embed_dim = num(key, v)?,
            "arch.norm_groups" => self.arch.norm_groups = num(key, v)?,
            "train.batch_size" => self.train.batch_size = num(key, v)?,
            "train.iterations" => self.train.iterations = num(key, v)?,
            "train.learning_rate" => self.train.learning_rate = num(key, v)?,
            "train.lr_decay" => self.train.lr_decay = num(key, v)?,
            "train.lr_decay_every" => self.train.lr_decay_every = num(key, v)?,
            "train.weight_decay" => self.train.weight_decay = num(key, v)?,
            "train.cond_dropout_prob" => self.train.cond_dropout_prob = num(key, v)?,
            "train.seed" => self.train.seed = num(key, v)?,
            "train.standardize" => self.train.standardize = flag(key, v)?,
            "train.log_every" => self.log_every = num(key, v)?,
            "sample.count" => self.sample.count = num(key, v)?,
            "sample.steps" => self.sample.steps = num(key, v)?,
            "sample.sampler" => {
                self.sample.sampler = match v {
                    "sde" => SamplerChoice::Sde,
                    "ode" => SamplerChoice::Ode,
                    _ => return Err(bad(key, v, "expected sde or ode")),
                }
            }
            "sample.ode_solver" => {
                self.sample.ode_solver = match v {
                    "heun" => OdeSolver::Heun,
                    "rk4" => OdeSolver::Rk4,
                    _ => return Err(bad(key, v, "expected heun or rk4")),
                }
            }
            "sample.chunk_size" => self.sample.chunk_size = num(key, v)?,
            "sample.guidance" => self.sample.guidance = num(key, v)?,
            "sample.label" => self.sample.label = parse_label(v)?,
            "sample.seed" => self.sample.seed = num(key, v)?,
            "eval.projections" => self.eval.metrics.projections = num(key, v)?,
            "eval.mswd_iterations" => self.eval.metrics.mswd.iterations = num(key, v)?,
            "eval.mswd_step" => self.eval.metrics.mswd.step_size = num(key, v)?,
            "eval.mswd_restarts" => self.eval.metrics.mswd.restarts = num(key, v)?,
            "eval.mmd_estimator" => {
                self.eval.metrics.mmd_estimator =
                    MmdEstimator::from_name(v).ok_or_else(|| bad(key, v, "expected v or u"))?
            }
            "eval.assignment_limit" => self.eval.metrics.assignment_limit = num(key, v)?,
            "eval.isometric_scaling" => self.eval.metrics.isometric_scaling = flag(key, v)?,
            "eval.subsystem" => self.eval.subsystem = list(key, v)?,
            "eval.seed" => self.eval.seed = num(key, v)?,
            "eval.max_swd" => self.eval.gate.swd = bound(key, v)?,
            "eval.max_mswd" => self.eval.gate.mswd = bound(key, v)?,
            "eval.max_w1" => self.eval.gate.w1 = bound(key, v)?,
            "eval.max_energy_mmd" => self.eval.gate.energy_mmd = bound(key, v)?,
            "eval.max_negativity_w1" => self.eval.gate.negativity_w1 = bound(key, v)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Textual value of `key`, as written by [`RunConfig::render`].
    pub fn get(&self, key: &str) -> Result<String, ConfigError> {
        let g = &self.data.generator;
        let m = &self.eval.metrics;
        Ok(match key {
            "data.qubits" => self.data.qubits.to_string(),
            "data.counts" => join(&self.data.counts),
            "data.lambda_min" => format!("{:?}", g.qubit.lambda_min),
            "data.lambda_max" => format!("{:?}", g.qubit.lambda_max),
            "data.unitary_sampler" => match g.unitary_sampler {
                UnitarySampler::Lie => "lie",
                UnitarySampler::Qr => "qr",
            }
            .to_string(),
            "data.seed" => self.data.seed.to_string(),
            "lie.friction" => format!("{:?}", g.lie.friction),
            "lie.step_size" => format!("{:?}", g.lie.step_size),
            "lie.burn_in_steps" => g.lie.burn_in_steps.to_string(),
            "lie.thinning" => g.lie.thinning.to_string(),
            "mirror.enabled" => self.mirror.enabled.to_string(),
            "mirror.isometric_scaling" => self.mirror.isometric_scaling.to_string(),
            "schedule.t_min" => format!("{:?}", self.schedule.t_min),
            "schedule.t_max" => format!("{:?}", self.schedule.t_max),
            "arch.hidden_dim" => self.arch.hidden_dim.to_string(),
            "arch.residual_blocks" => self.arch.residual_blocks.to_string(),
            "arch.time_embed_dim" => self.arch.time_embed_dim.to_string(),
            "arch.norm_groups" => self.arch.norm_groups.to_string(),
            "train.batch_size" => self.train.batch_size.to_string(),
            "train.iterations" => self.train.iterations.to_string(),
            "train.learning_rate" => format!("{:?}", self.train.learning_rate),
            "train.lr_decay" => format!("{:?}", self.train.lr_decay),
            "train.lr_decay_every" => self.train.lr_decay_every.to_string(),
            "train.weight_decay" => format!("{:?}", self.train.weight_decay),
            "train.cond_dropout_prob" => format!("{:?}", self.train.cond_dropout_prob),
            "train.seed" => self.train.seed.to_string(),
            "train.standardize" => self.train.standardize.to_string(),
            "train.log_every" => self.log_every.to_string(),
            "sample.count" => self.sample.count.to_string(),
            "sample.steps" => self.sample.steps.to_string(),
            "sample.sampler" => match self.sample.sampler {
                SamplerChoice::Sde => "sde",
                SamplerChoice::Ode => "ode",
            }
            .to_string(),
            "sample.ode_solver" => match self.sample.ode_solver {
                OdeSolver::Heun => "heun",
                OdeSolver::Rk4 => "rk4",
            }
            .to_string(),
            "sample.chunk_size" => self.sample.chunk_size.to_string(),
            "sample.guidance" => format!("{:?}", self.sample.guidance),
            "sample.label" => self.sample.label.map_or_else(|| "none".to_string(), |l| join(l.weights())),
            "sample.seed" => self.sample.seed.to_string(),
            "eval.projections" => m.projections.to_string(),
            "eval.mswd_iterations" => m.mswd.iterations.to_string(),
            "eval.mswd_step" => format!("{:?}", m.mswd.step_size),
            "eval.mswd_restarts" => m.mswd.restarts.to_string(),
            "eval.mmd_estimator" => m.mmd_estimator.name().to_string(),
            "eval.assignment_limit" => m.assignment_limit.to_string(),
            "eval.isometric_scaling" => m.isometric_scaling.to_string(),
            "eval.subsystem" => join(&self.eval.subsystem),
            "eval.seed" => self.eval.seed.to_string(),
            "eval.max_swd" => opt(self.eval.gate.swd),
            "eval.max_mswd" => opt(self.eval.gate.mswd),
            "eval.max_w1" => opt(self.eval.gate.w1),
            "eval.max_energy_mmd" => opt(self.eval.gate.energy_mmd),
            "eval.max_negativity_w1" => opt(self.eval.gate.negativity_w1),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        })
    }

    /// `(key, value)` for every key in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .map(|k| (*k, self.get(k).expect("every listed key is known")))
            .collect()
    }

    /// Canonical text: one `key = value` line per key.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Applies every `key = value` line of `text` on top of `self`. Blank
    /// lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Defaults overlaid with `text`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_text(&text)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), ConfigError> {
        let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            text: kv.to_string(),
        })?;
        self.set(k.trim(), v.trim())
    }
}
