//! Variance-preserving score-based diffusion on real vectors.
//!
//! The forward process is the Ornstein-Uhlenbeck SDE `dx = -x dt + sqrt(2) dw`
//! with `x_t | x_0 ~ N(e^{-t} x_0, (1 - e^{-2t}) I)`. A conditional score
//! network is trained by denoising score matching and sampled with the
//! reverse SDE or the probability-flow ODE, optionally with classifier-free
//! guidance.

mod gemm;
mod generate;
mod loss;
mod network;
mod optim;
mod sample;
mod schedule;
mod train;

pub use generate::{
    generate_states, generate_states_raw, sample_coordinates, RawGeneration, ValiditySummary, VALIDITY_TOLERANCE,
};
pub use loss::{dsm_loss, dsm_loss_with_draws, DsmDraws};
pub use network::{Conditioning, ScoreArch, ScoreNetwork, Segment, Tape};
pub use optim::{AdamState, AdamW, TrainConfig};
pub use sample::{
    guided_score, pf_ode_from, reverse_sde_from, sample, sample_pf_ode, sample_reverse_sde, GaussianScore,
    GuidanceSpec, OdeSolver, SamplerConfig, SamplerKind, ScoreModel, ZeroScore,
};
pub use schedule::{embed_time, forward_perturb, DiffusionSchedule};
pub use train::{train, Checkpoint, Standardization, TrainEvent, Trainer, TrainingData};
