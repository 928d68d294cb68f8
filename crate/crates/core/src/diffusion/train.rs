use alloc::vec::Vec;

use rand::Rng;

use super::loss::{dsm_loss_with_draws, DsmDraws};
use super::network::{ScoreArch, ScoreNetwork};
use super::optim::{AdamState, AdamW, TrainConfig};
use super::schedule::DiffusionSchedule;
use crate::error::{Error, Result};
use crate::mirror::{encode_for_model, MirrorConfig};
use crate::quantum::{ClassLabel, StateDataset};
use crate::{math, rng};

const INIT_STREAM_TAG: u64 = 0x696e_6974;
const TRAIN_STREAM_TAG: u64 = 0x74_7261_696e;
const LOSS_AVERAGE_DECAY: f64 = 0.99;

/// Per-coordinate affine map `z = (x - mean) / scale` between model
/// coordinates and diffusion coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardization {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: alloc::vec![0.0; dim],
            scale: alloc::vec![1.0; dim],
        }
    }

    /// Sample mean and standard deviation of the rows of `x`. Coordinates
    /// with no spread keep scale one.
    pub fn fit(x: &[f64], dim: usize) -> Self {
        let n = x.len() / dim;
        let mut mean = alloc::vec![0.0; dim];
        for row in x.chunks_exact(dim) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut var = alloc::vec![0.0; dim];
        for row in x.chunks_exact(dim) {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let scale = var
            .iter()
            .map(|v| {
                let sd = math::sqrt(v / n as f64);
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn forward(&self, x: &mut [f64]) {
        for row in x.chunks_exact_mut(self.dim()) {
            for k in 0..row.len() {
                row[k] = (row[k] - self.mean[k]) / self.scale[k];
            }
        }
    }

    pub fn inverse(&self, z: &mut [f64]) {
        for row in z.chunks_exact_mut(self.dim()) {
            for k in 0..row.len() {
                row[k] = self.mean[k] + self.scale[k] * row[k];
            }
        }
    }
}

/// Encoded training set: `n x dim` coordinates and one label per row.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingData {
    pub dim: usize,
    pub x: Vec<f64>,
    pub labels: Vec<Option<ClassLabel>>,
    pub mirror: MirrorConfig,
}

impl TrainingData {
    /// Encodes every record with `mirror` (mirror map, or plain vectorization
    /// when the mirror is disabled).
    pub fn from_dataset(ds: &StateDataset, mirror: MirrorConfig) -> Result<Self> {
        let dim = ds.dim() * ds.dim();
        let mut x = Vec::with_capacity(ds.len() * dim);
        let mut labels = Vec::with_capacity(ds.len());
        for (label, rho) in &ds.records {
            x.extend_from_slice(encode_for_model(rho, &mirror)?.as_slice());
            labels.push(Some(*label));
        }
        Ok(Self { dim, x, labels, mirror })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Everything needed to sample from, or keep training, a model.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub arch: ScoreArch,
    pub schedule: DiffusionSchedule,
    pub mirror: MirrorConfig,
    pub train: TrainConfig,
    pub standardization: Standardization,
    pub params: Vec<f64>,
    pub iterations: u64,
    /// Exponential moving average of the training loss (NaN before the
    /// first step).
    pub final_loss: f64,
    pub optimizer: AdamState,
}

impl Checkpoint {
    pub fn network(&self) -> Result<ScoreNetwork> {
        ScoreNetwork::from_params(self.arch, self.params.clone())
    }

    /// Side length of the modelled matrices.
    pub fn matrix_dim(&self) -> usize {
        let mut n = 0;
        while n * n < self.arch.input_dim {
            n += 1;
        }
        n
    }
}

/// Progress report passed to the training callback after each step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainEvent {
    /// Steps completed, including this one.
    pub iteration: u64,
    pub loss: f64,
    pub average_loss: f64,
    pub learning_rate: f64,
}

/// Stateful training loop. The randomness of step `k` comes from stream `k`
/// of the seed, so a resumed run repeats an uninterrupted one bit for bit.
pub struct Trainer<'a> {
    data: &'a TrainingData,
    z: Vec<f64>,
    net: ScoreNetwork,
    ck: Checkpoint,
    opt: AdamW,
}

impl<'a> Trainer<'a> {
    pub fn new(
        data: &'a TrainingData,
        arch: ScoreArch,
        schedule: DiffusionSchedule,
        cfg: TrainConfig,
    ) -> Result<Self> {
        if arch.input_dim != data.dim {
            return Err(Error::DimensionMismatch {
                expected: arch.input_dim,
                actual: data.dim,
            });
        }
        cfg.validate()?;
        schedule.validate()?;
        let net = ScoreNetwork::init(arch, &mut rng::stream(rng::mix(cfg.seed, INIT_STREAM_TAG), 0))?;
        let standardization = if cfg.standardize && !data.is_empty() {
            Standardization::fit(&data.x, data.dim)
        } else {
            Standardization::identity(data.dim)
        };
        let ck = Checkpoint {
            arch,
            schedule,
            mirror: data.mirror,
            train: cfg,
            standardization,
            params: Vec::new(),
            iterations: 0,
            final_loss: f64::NAN,
            optimizer: AdamState::new(net.num_params()),
        };
        Ok(Self::assemble(data, net, ck))
    }

    /// Continues from `ck`. The data must be encoded the same way.
    pub fn resume(data: &'a TrainingData, ck: Checkpoint) -> Result<Self> {
        if ck.mirror != data.mirror {
            return Err(Error::InvalidConfig(alloc::format!(
                "checkpoint mirror config {:?} does not match data {:?}",
                ck.mirror, data.mirror
            )));
        }
        if ck.arch.input_dim != data.dim {
            return Err(Error::DimensionMismatch {
                expected: ck.arch.input_dim,
                actual: data.dim,
            });
        }
        let net = ck.network()?;
        if ck.optimizer.m.len() != net.num_params() {
            return Err(Error::DimensionMismatch {
                expected: net.num_params(),
                actual: ck.optimizer.m.len(),
            });
        }
        Ok(Self::assemble(data, net, ck))
    }

    fn assemble(data: &'a TrainingData, net: ScoreNetwork, ck: Checkpoint) -> Self {
        let mut z = data.x.clone();
        ck.standardization.forward(&mut z);
        let opt = AdamW {
            weight_decay: ck.train.weight_decay,
            ..Default::default()
        };
        Self { data, z, net, ck, opt }
    }

    pub fn iterations(&self) -> u64 {
        self.ck.iterations
    }

    pub fn network(&self) -> &ScoreNetwork {
        &self.net
    }

    /// One optimizer step; returns the batch loss.
    pub fn step(&mut self) -> Result<TrainEvent> {
        if self.data.is_empty() {
            return Err(Error::Empty("training data"));
        }
        let cfg = self.ck.train;
        let k = self.ck.iterations;
        let d = self.data.dim;
        let mut rng = rng::stream(rng::mix(cfg.seed, TRAIN_STREAM_TAG), k);
        let mut x0 = Vec::with_capacity(cfg.batch_size * d);
        let mut labels = Vec::with_capacity(cfg.batch_size);
        for _ in 0..cfg.batch_size {
            let i = rng.random_range(0..self.data.len());
            x0.extend_from_slice(&self.z[i * d..(i + 1) * d]);
            labels.push(self.data.labels[i]);
        }
        let draws = DsmDraws::sample(cfg.batch_size, d, &self.ck.schedule, cfg.cond_dropout_prob, &mut rng);
        let (loss, grad) = dsm_loss_with_draws(&self.net, &x0, &labels, &draws)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss { iteration: k, loss });
        }
        let lr = cfg.learning_rate_at(k);
        self.opt.step(self.net.params_mut(), &grad, &mut self.ck.optimizer, lr);
        self.ck.iterations += 1;
        self.ck.final_loss = if self.ck.final_loss.is_nan() {
            loss
        } else {
            LOSS_AVERAGE_DECAY * self.ck.final_loss + (1.0 - LOSS_AVERAGE_DECAY) * loss
        };
        Ok(TrainEvent {
            iteration: self.ck.iterations,
            loss,
            average_loss: self.ck.final_loss,
            learning_rate: lr,
        })
    }

    /// Runs `steps` more iterations, reporting each to `on_step`.
    pub fn run(&mut self, steps: u64, mut on_step: impl FnMut(&TrainEvent)) -> Result<()> {
        for _ in 0..steps {
            let ev = self.step()?;
            on_step(&ev);
        }
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let mut ck = self.ck.clone();
        ck.params = self.net.params().to_vec();
        // the recorded budget is what was actually run
        ck.train.iterations = ck.iterations;
        ck
    }
}

/// Trains for `cfg.iterations` steps from a fresh initialization.
pub fn train(
    data: &TrainingData,
    cfg: TrainConfig,
    schedule: DiffusionSchedule,
    arch: ScoreArch,
) -> Result<Checkpoint> {
    let mut trainer = Trainer::new(data, arch, schedule, cfg)?;
    trainer.run(cfg.iterations, |_| {})?;
    Ok(trainer.checkpoint())
}
