use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Training hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub iterations: u64,
    pub learning_rate: f64,
    /// Multiplicative decay applied every `lr_decay_every` optimizer steps.
    pub lr_decay: f64,
    pub lr_decay_every: u64,
    pub weight_decay: f64,
    pub cond_dropout_prob: f64,
    pub seed: u64,
    /// Standardize each input coordinate with the training-set mean and
    /// standard deviation before diffusion.
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 128,
            iterations: 10_000,
            learning_rate: 1e-3,
            lr_decay: 0.995,
            lr_decay_every: 1000,
            weight_decay: 1e-4,
            cond_dropout_prob: 0.1,
            seed: 0,
            standardize: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.batch_size > 0
            && self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.lr_decay > 0.0
            && self.lr_decay <= 1.0
            && self.lr_decay_every > 0
            && self.weight_decay >= 0.0
            && (0.0..=1.0).contains(&self.cond_dropout_prob);
        if !ok {
            return Err(Error::InvalidConfig(alloc::format!("invalid training config {self:?}")));
        }
        Ok(())
    }

    /// Step-decayed learning rate for optimizer step `step` (0-based).
    pub fn learning_rate_at(&self, step: u64) -> f64 {
        self.learning_rate * math::pow(self.lr_decay, (step / self.lr_decay_every) as f64)
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// Adam with decoupled weight decay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamW {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamW {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-4,
        }
    }
}

impl AdamW {
    /// One update at learning rate `lr`.
    pub fn step(&self, params: &mut [f64], grad: &[f64], state: &mut AdamState, lr: f64) {
        assert_eq!(params.len(), grad.len());
        assert_eq!(params.len(), state.m.len());
        state.step += 1;
        let k = state.step as f64;
        let bc1 = 1.0 - math::pow(self.beta1, k);
        let bc2 = 1.0 - math::pow(self.beta2, k);
        for i in 0..params.len() {
            let g = grad[i];
            let m = self.beta1 * state.m[i] + (1.0 - self.beta1) * g;
            let v = self.beta2 * state.v[i] + (1.0 - self.beta2) * g * g;
            state.m[i] = m;
            state.v[i] = v;
            let update = (m / bc1) / (math::sqrt(v / bc2) + self.eps);
            params[i] -= lr * (update + self.weight_decay * params[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learning_rate_steps_down() {
        let c = TrainConfig::default();
        assert_eq!(c.learning_rate_at(0), 1e-3);
        assert_eq!(c.learning_rate_at(999), 1e-3);
        assert!((c.learning_rate_at(1000) - 0.995e-3).abs() < 1e-18);
        assert!((c.learning_rate_at(2500) - 0.995f64.powi(2) * 1e-3).abs() < 1e-18);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let opt = AdamW {
            weight_decay: 0.0,
            ..Default::default()
        };
        let mut p = vec![1.0, -1.0];
        let mut s = AdamState::new(2);
        opt.step(&mut p, &[0.5, -2.0], &mut s, 0.1);
        // bias-corrected first step is lr * sign(g)
        assert!((p[0] - 0.9).abs() < 1e-7);
        assert!((p[1] + 0.9).abs() < 1e-7);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let opt = AdamW::default();
        let mut p = vec![3.0, -2.0, 0.5];
        let mut s = AdamState::new(3);
        for _ in 0..3000 {
            let g: Vec<f64> = p.iter().map(|x| 2.0 * (x - 1.0)).collect();
            opt.step(&mut p, &g, &mut s, 1e-2);
        }
        for x in p {
            assert!((x - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            cond_dropout_prob: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            batch_size: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
