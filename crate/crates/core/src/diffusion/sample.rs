//! Classifier-free guidance and the reverse-time samplers.
//!
//! Samplers integrate from `t_max` down to `t_min` on a uniform grid of
//! `steps` intervals, starting from `N(0, (1 - e^{-2 t_max}) I)`. In reverse
//! time `tau = t_max - t` the dynamics are
//!
//! ```text
//! SDE:     dy = (y + 2 s(y, t)) dtau + sqrt(2) dw
//! PF-ODE:  dy = (y + s(y, t)) dtau
//! ```
//!
//! Sample `i` draws all of its randomness from stream `i` of the seed, so
//! results do not depend on chunking.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::network::{Conditioning, ScoreNetwork};
use super::schedule::DiffusionSchedule;
use crate::error::{Error, Result};
use crate::math;
use crate::quantum::ClassLabel;
use crate::rng::{self, StreamRng};

/// Anything that returns scores for a batch of points at one time.
pub trait ScoreModel {
    fn dim(&self) -> usize;

    /// `x` is `batch x dim`; `None` asks for the unconditional score.
    fn score(&self, x: &[f64], t: f64, label: Option<&ClassLabel>) -> Result<Vec<f64>>;
}

impl ScoreModel for ScoreNetwork {
    fn dim(&self) -> usize {
        self.arch().input_dim
    }

    fn score(&self, x: &[f64], t: f64, label: Option<&ClassLabel>) -> Result<Vec<f64>> {
        let b = x.len() / self.arch().input_dim;
        ScoreNetwork::score(self, x, &vec![t; b], &Conditioning::repeated(label, b))
    }
}

/// Guidance strength and target label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuidanceSpec {
    pub gamma: f64,
    pub label: Option<ClassLabel>,
}

impl GuidanceSpec {
    pub fn unconditional() -> Self {
        Self { gamma: 0.0, label: None }
    }

    pub fn conditional(label: ClassLabel, gamma: f64) -> Self {
        Self {
            gamma,
            label: Some(label),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!("guidance strength {}", self.gamma)));
        }
        Ok(())
    }
}

/// `(1 - gamma) s(x, t) + gamma s(x, t | label)`.
///
/// `gamma = 0` and `gamma = 1` return the unconditional and conditional
/// scores exactly; without a label the unconditional score is returned.
pub fn guided_score<M: ScoreModel + ?Sized>(model: &M, x: &[f64], t: f64, spec: &GuidanceSpec) -> Result<Vec<f64>> {
    let label = match spec.label.as_ref() {
        Some(l) if spec.gamma != 0.0 => l,
        _ => return model.score(x, t, None),
    };
    if spec.gamma == 1.0 {
        return model.score(x, t, Some(label));
    }
    let uncond = model.score(x, t, None)?;
    let cond = model.score(x, t, Some(label))?;
    let g = spec.gamma;
    Ok(uncond.iter().zip(&cond).map(|(u, c)| (1.0 - g) * u + g * c).collect())
}

/// Probability-flow integrator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OdeSolver {
    #[default]
    Heun,
    Rk4,
}

/// Which reverse-time process to simulate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SamplerKind {
    #[default]
    ReverseSde,
    ProbabilityFlow(OdeSolver),
}

/// Sampler settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    pub steps: usize,
    /// Samples integrated together per batch.
    pub chunk_size: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            kind: SamplerKind::ReverseSde,
            steps: 500,
            chunk_size: 500,
        }
    }
}

fn time_grid(schedule: &DiffusionSchedule, steps: usize) -> (f64, impl Fn(usize) -> f64 + '_) {
    let h = (schedule.t_max - schedule.t_min) / steps as f64;
    (h, move |k: usize| {
        if k == steps {
            schedule.t_min
        } else {
            schedule.t_max - k as f64 * h
        }
    })
}

fn check_finite(y: &[f64], step: usize) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { step })
    }
}

fn prior_draws(schedule: &DiffusionSchedule, dim: usize, rngs: &mut [StreamRng]) -> Vec<f64> {
    let sd = math::sqrt(schedule.prior_variance());
    let mut y = Vec::with_capacity(rngs.len() * dim);
    for r in rngs.iter_mut() {
        for _ in 0..dim {
            let z: f64 = r.sample(StandardNormal);
            y.push(sd * z);
        }
    }
    y
}

/// Euler-Maruyama from the given start. `noise` supplies one standard normal
/// vector per sample per step; `None` integrates with zero noise. The last
/// step adds no noise.
fn integrate_sde<M: ScoreModel + ?Sized>(
    model: &M,
    spec: &GuidanceSpec,
    schedule: &DiffusionSchedule,
    steps: usize,
    y: &mut [f64],
    mut noise: Option<&mut [StreamRng]>,
) -> Result<()> {
    let (h, time) = time_grid(schedule, steps);
    let dim = model.dim();
    let amp = math::sqrt(2.0 * h);
    for k in 0..steps {
        let s = guided_score(model, y, time(k), spec)?;
        let last = k + 1 == steps;
        for (i, (row, srow)) in y.chunks_exact_mut(dim).zip(s.chunks_exact(dim)).enumerate() {
            for (v, sv) in row.iter_mut().zip(srow) {
                *v += h * (*v + 2.0 * sv);
            }
            if let (false, Some(rngs)) = (last, noise.as_deref_mut()) {
                for v in row.iter_mut() {
                    let z: f64 = rngs[i].sample(StandardNormal);
                    *v += amp * z;
                }
            }
        }
        check_finite(y, k)?;
    }
    Ok(())
}

fn drift<M: ScoreModel + ?Sized>(model: &M, spec: &GuidanceSpec, y: &[f64], t: f64) -> Result<Vec<f64>> {
    let mut s = guided_score(model, y, t, spec)?;
    for (sv, v) in s.iter_mut().zip(y) {
        *sv += v;
    }
    Ok(s)
}

fn axpy(y: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(v, d)| v + a * d).collect()
}

fn integrate_ode<M: ScoreModel + ?Sized>(
    model: &M,
    spec: &GuidanceSpec,
    schedule: &DiffusionSchedule,
    steps: usize,
    solver: OdeSolver,
    y: &mut [f64],
) -> Result<()> {
    let (h, time) = time_grid(schedule, steps);
    for k in 0..steps {
        let (t0, t1) = (time(k), time(k + 1));
        let k1 = drift(model, spec, y, t0)?;
        match solver {
            OdeSolver::Heun => {
                let k2 = drift(model, spec, &axpy(y, h, &k1), t1)?;
                for i in 0..y.len() {
                    y[i] += 0.5 * h * (k1[i] + k2[i]);
                }
            }
            OdeSolver::Rk4 => {
                let tm = 0.5 * (t0 + t1);
                let k2 = drift(model, spec, &axpy(y, 0.5 * h, &k1), tm)?;
                let k3 = drift(model, spec, &axpy(y, 0.5 * h, &k2), tm)?;
                let k4 = drift(model, spec, &axpy(y, h, &k3), t1)?;
                for i in 0..y.len() {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        check_finite(y, k)?;
    }
    Ok(())
}

fn check_args<M: ScoreModel + ?Sized>(model: &M, spec: &GuidanceSpec, schedule: &DiffusionSchedule, steps: usize, y: &[f64]) -> Result<()> {
    spec.validate()?;
    schedule.validate()?;
    if steps == 0 {
        return Err(Error::InvalidConfig("sampler needs at least one step".into()));
    }
    if y.len() % model.dim() != 0 {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: y.len(),
        });
    }
    Ok(())
}

/// Deterministic reverse-SDE integration (zero noise) from the rows of `y0`.
pub fn reverse_sde_from<M: ScoreModel + ?Sized>(
    model: &M,
    spec: &GuidanceSpec,
    schedule: &DiffusionSchedule,
    steps: usize,
    y0: &[f64],
) -> Result<Vec<f64>> {
    check_args(model, spec, schedule, steps, y0)?;
    let mut y = y0.to_vec();
    integrate_sde(model, spec, schedule, steps, &mut y, None)?;
    Ok(y)
}

/// Probability-flow integration from the rows of `y0`.
pub fn pf_ode_from<M: ScoreModel + ?Sized>(
    model: &M,
    spec: &GuidanceSpec,
    schedule: &DiffusionSchedule,
    steps: usize,
    solver: OdeSolver,
    y0: &[f64],
) -> Result<Vec<f64>> {
    check_args(model, spec, schedule, steps, y0)?;
    let mut y = y0.to_vec();
    integrate_ode(model, spec, schedule, steps, solver, &mut y)?;
    Ok(y)
}

/// Draws `count` samples, returned as one flat `count x dim` array.
pub fn sample<M: ScoreModel + ?Sized>(
    model: &M,
    spec: &GuidanceSpec,
    schedule: &DiffusionSchedule,
    cfg: &SamplerConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_args(model, spec, schedule, cfg.steps, &[])?;
    let dim = model.dim();
    let chunk = cfg.chunk_size.max(1);
    let mut out = Vec::with_capacity(count * dim);
    let mut start = 0;
    while start < count {
        let end = (start + chunk).min(count);
        let mut rngs: Vec<StreamRng> = (start..end).map(|i| rng::stream(seed, i as u64)).collect();
        let mut y = prior_draws(schedule, dim, &mut rngs);
        match cfg.kind {
            SamplerKind::ReverseSde => integrate_sde(model, spec, schedule, cfg.steps, &mut y, Some(&mut rngs))?,
            SamplerKind::ProbabilityFlow(solver) => integrate_ode(model, spec, schedule, cfg.steps, solver, &mut y)?,
        }
        out.extend_from_slice(&y);
        start = end;
    }
    Ok(out)
}

fn split_rows(flat: Vec<f64>, dim: usize) -> Vec<Vec<f64>> {
    flat.chunks_exact(dim).map(<[f64]>::to_vec).collect()
}

/// `count` reverse-SDE samples.
pub fn sample_reverse_sde<M: ScoreModel + ?Sized>(
    model: &M,
    spec: &GuidanceSpec,
    schedule: &DiffusionSchedule,
    steps: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let cfg = SamplerConfig {
        kind: SamplerKind::ReverseSde,
        steps,
        ..Default::default()
    };
    Ok(split_rows(sample(model, spec, schedule, &cfg, count, seed)?, model.dim()))
}

/// `count` probability-flow samples with the Heun integrator.
pub fn sample_pf_ode<M: ScoreModel + ?Sized>(
    model: &M,
    spec: &GuidanceSpec,
    schedule: &DiffusionSchedule,
    steps: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let cfg = SamplerConfig {
        kind: SamplerKind::ProbabilityFlow(OdeSolver::Heun),
        steps,
        ..Default::default()
    };
    Ok(split_rows(sample(model, spec, schedule, &cfg, count, seed)?, model.dim()))
}

/// Exact score of the forward marginals when the data are `N(0, s^2 I)`:
/// `-x / (s^2 e^{-2t} + 1 - e^{-2t})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianScore {
    pub dim: usize,
    pub data_std: f64,
}

impl GaussianScore {
    pub fn marginal_variance(&self, t: f64) -> f64 {
        self.data_std * self.data_std * math::exp(-2.0 * t) + DiffusionSchedule::variance(t)
    }
}

impl ScoreModel for GaussianScore {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, x: &[f64], t: f64, _label: Option<&ClassLabel>) -> Result<Vec<f64>> {
        let v = self.marginal_variance(t);
        Ok(x.iter().map(|xi| -xi / v).collect())
    }
}

/// Always-zero score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroScore {
    pub dim: usize,
}

impl ScoreModel for ZeroScore {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, x: &[f64], _t: f64, _label: Option<&ClassLabel>) -> Result<Vec<f64>> {
        Ok(vec![0.0; x.len()])
    }
}
