use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::math;

/// Variance-preserving forward process `dx = -x dt + sqrt(2) dw` on
/// `[t_min, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionSchedule {
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for DiffusionSchedule {
    fn default() -> Self {
        Self {
            t_min: 1e-3,
            t_max: 5.0,
        }
    }
}

impl DiffusionSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "schedule needs 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= self.t_min && t <= self.t_max) {
            return Err(Error::TimeOutOfRange {
                t,
                t_min: self.t_min,
                t_max: self.t_max,
            });
        }
        Ok(())
    }

    /// `e^{-t}`.
    #[inline]
    pub fn mean_scale(t: f64) -> f64 {
        math::exp(-t)
    }

    /// `1 - e^{-2t}`.
    #[inline]
    pub fn variance(t: f64) -> f64 {
        -math::expm1(-2.0 * t)
    }

    /// Variance of the reverse-time initial draw, `1 - e^{-2 t_max}`.
    pub fn prior_variance(&self) -> f64 {
        Self::variance(self.t_max)
    }

    /// Denoising loss weight `lambda(t) = 1 - e^{-2t}`.
    #[inline]
    pub fn loss_weight(t: f64) -> f64 {
        Self::variance(t)
    }
}

/// Draws `x_t ~ p_t(. | x0)` and returns it with the conditional score
/// `-(x_t - e^{-t} x0) / (1 - e^{-2t})`.
pub fn forward_perturb<R: Rng + ?Sized>(
    schedule: &DiffusionSchedule,
    x0: &[f64],
    t: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    schedule.check_time(t)?;
    let a = DiffusionSchedule::mean_scale(t);
    let var = DiffusionSchedule::variance(t);
    let sd = math::sqrt(var);
    let mut xt = Vec::with_capacity(x0.len());
    let mut target = Vec::with_capacity(x0.len());
    for &x in x0 {
        let eps: f64 = rng.sample(StandardNormal);
        let mean = a * x;
        let v = mean + sd * eps;
        xt.push(v);
        target.push(-(v - mean) / var);
    }
    Ok((xt, target))
}

/// Sinusoidal time embedding: `sin(t w_k)` for `k < dim/2`, then `cos(t w_k)`,
/// with `w_k = 10000^{-2k/dim}`.
pub fn embed_time(t: f64, dim: usize) -> Result<Vec<f64>> {
    if dim % 2 != 0 {
        return Err(Error::InvalidConfig(alloc::format!("time embedding dimension {dim} is odd")));
    }
    let mut out = alloc::vec![0.0; dim];
    embed_time_into(t, &mut out);
    Ok(out)
}

pub(crate) fn embed_time_into(t: f64, out: &mut [f64]) {
    let dim = out.len();
    let half = dim / 2;
    for k in 0..half {
        let w = math::pow(10000.0, -2.0 * k as f64 / dim as f64);
        out[k] = math::sin(t * w);
        out[half + k] = math::cos(t * w);
    }
}
