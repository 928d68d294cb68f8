use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::network::{Conditioning, ScoreNetwork};
use super::schedule::DiffusionSchedule;
use crate::error::{Error, Result};
use crate::math;
use crate::quantum::ClassLabel;

/// Random quantities of one denoising step: per-row time, noise and whether
/// the label is dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct DsmDraws {
    pub t: Vec<f64>,
    /// `batch x dim` standard normals.
    pub eps: Vec<f64>,
    pub drop_label: Vec<bool>,
}

impl DsmDraws {
    /// Times uniform on `[t_min, t_max]`, then the noise, then the dropout
    /// coin flips, in that order.
    pub fn sample<R: Rng + ?Sized>(
        batch: usize,
        dim: usize,
        schedule: &DiffusionSchedule,
        cond_dropout_prob: f64,
        rng: &mut R,
    ) -> Self {
        let t = (0..batch)
            .map(|_| schedule.t_min + (schedule.t_max - schedule.t_min) * rng.random::<f64>())
            .collect();
        let eps = (0..batch * dim).map(|_| rng.sample(StandardNormal)).collect();
        let drop_label = (0..batch).map(|_| rng.random::<f64>() < cond_dropout_prob).collect();
        Self { t, eps, drop_label }
    }
}

/// Weighted denoising score matching loss for fixed draws:
///
/// `mean_i lambda(t_i) || s(x_t, t_i, c_i) + eps_i / sigma_i ||^2`
///
/// with `x_t = e^{-t} x0 + sigma eps`, `sigma^2 = lambda(t) = 1 - e^{-2t}`.
/// Returns the loss and its gradient with respect to the parameters.
pub fn dsm_loss_with_draws(
    net: &ScoreNetwork,
    x0: &[f64],
    labels: &[Option<ClassLabel>],
    draws: &DsmDraws,
) -> Result<(f64, Vec<f64>)> {
    let b = labels.len();
    let d = net.arch().input_dim;
    if b == 0 {
        return Err(Error::Empty("training batch"));
    }
    if x0.len() != b * d || draws.eps.len() != b * d || draws.t.len() != b || draws.drop_label.len() != b {
        return Err(Error::DimensionMismatch {
            expected: b * d,
            actual: x0.len(),
        });
    }
    let mut xt = Vec::with_capacity(b * d);
    let mut sigmas = Vec::with_capacity(b);
    for r in 0..b {
        let t = draws.t[r];
        let a = DiffusionSchedule::mean_scale(t);
        let sigma = math::sqrt(DiffusionSchedule::variance(t));
        sigmas.push(sigma);
        for k in 0..d {
            xt.push(a * x0[r * d + k] + sigma * draws.eps[r * d + k]);
        }
    }
    let rows: Vec<Option<ClassLabel>> = labels
        .iter()
        .zip(&draws.drop_label)
        .map(|(l, &drop)| if drop { None } else { *l })
        .collect();
    let tape = net.forward(&xt, &draws.t, &Conditioning::from_rows(&rows))?;
    let out = tape.output();
    let mut loss = 0.0;
    let mut d_out = Vec::with_capacity(b * d);
    let inv_b = 1.0 / b as f64;
    for r in 0..b {
        let sigma = sigmas[r];
        for k in 0..d {
            // sigma * (s - target) with target = -eps / sigma
            let resid = sigma * out[r * d + k] + draws.eps[r * d + k];
            loss += resid * resid;
            d_out.push(2.0 * sigma * resid * inv_b);
        }
    }
    loss *= inv_b;
    let grad = net.backward(&tape, &d_out);
    Ok((loss, grad))
}

/// Draws fresh randomness and evaluates [`dsm_loss_with_draws`].
pub fn dsm_loss<R: Rng + ?Sized>(
    net: &ScoreNetwork,
    x0: &[f64],
    labels: &[Option<ClassLabel>],
    schedule: &DiffusionSchedule,
    cond_dropout_prob: f64,
    rng: &mut R,
) -> Result<(f64, Vec<f64>)> {
    let draws = DsmDraws::sample(labels.len(), net.arch().input_dim, schedule, cond_dropout_prob, rng);
    dsm_loss_with_draws(net, x0, labels, &draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::ScoreArch;
    use crate::rng;
    use alloc::vec;

    #[test]
    fn zero_network_loss_is_noise_energy() {
        let arch = ScoreArch {
            input_dim: 2,
            hidden_dim: 8,
            residual_blocks: 1,
            time_embed_dim: 4,
            label_dim: 3,
            norm_groups: 2,
        };
        let net = ScoreNetwork::init(arch, &mut rng::stream(0, 0)).unwrap();
        let draws = DsmDraws {
            t: vec![0.5, 1.0],
            eps: vec![1.0, -2.0, 0.5, 0.0],
            drop_label: vec![false, true],
        };
        let (loss, grad) = dsm_loss_with_draws(&net, &[0.0; 4], &[None, None], &draws).unwrap();
        // zero output: loss = mean ||eps||^2
        assert!((loss - (5.0 + 0.25) / 2.0).abs() < 1e-15);
        assert_eq!(grad.len(), net.num_params());
        assert!(dsm_loss_with_draws(&net, &[], &[], &draws).is_err());
    }

    #[test]
    fn dropout_probability_is_respected() {
        let s = DiffusionSchedule::default();
        let d = DsmDraws::sample(10_000, 1, &s, 0.1, &mut rng::stream(1, 0));
        let rate = d.drop_label.iter().filter(|&&x| x).count() as f64 / 1e4;
        assert!((rate - 0.1).abs() < 0.01);
        assert!(d.t.iter().all(|&t| t >= s.t_min && t <= s.t_max));
        let none = DsmDraws::sample(100, 1, &s, 0.0, &mut rng::stream(1, 0));
        assert!(none.drop_label.iter().all(|&x| !x));
    }
}
