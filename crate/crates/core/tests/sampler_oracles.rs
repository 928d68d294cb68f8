use qmirror_core::diffusion::{
    forward_perturb, sample, DiffusionSchedule, GaussianScore, GuidanceSpec, OdeSolver, SamplerConfig, SamplerKind,
};
use qmirror_core::metrics::{energy_mmd, MmdEstimator};
use qmirror_core::rng;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

const DATA_STD: f64 = 0.5;
const COUNT: usize = 5000;

/// `W1` between the empirical sample and `N(0, s^2)`, integrating
/// `|F_n^{-1}(u) - F^{-1}(u)|` with a midpoint rule inside each empirical
/// quantile cell.
fn w1_to_normal(samples: &[f64], s: f64) -> f64 {
    let normal = Normal::new(0.0, s).unwrap();
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let sub = 16;
    let mut total = 0.0;
    for (i, xi) in x.iter().enumerate() {
        for k in 0..sub {
            let u = (i as f64 + (k as f64 + 0.5) / sub as f64) / n;
            total += (xi - normal.inverse_cdf(u)).abs();
        }
    }
    total / (n * sub as f64)
}

fn oracle_samples(kind: SamplerKind, seed: u64) -> Vec<f64> {
    let model = GaussianScore {
        dim: 1,
        data_std: DATA_STD,
    };
    let cfg = SamplerConfig {
        kind,
        steps: 500,
        ..Default::default()
    };
    sample(&model, &GuidanceSpec::unconditional(), &DiffusionSchedule::default(), &cfg, COUNT, seed).unwrap()
}

#[test]
fn reverse_sde_recovers_the_gaussian() {
    let x = oracle_samples(SamplerKind::ReverseSde, 1);
    let w1 = w1_to_normal(&x, DATA_STD);
    assert!(w1 <= 0.05, "W1 {w1}");
}

#[test]
fn probability_flow_recovers_the_gaussian() {
    for solver in [OdeSolver::Heun, OdeSolver::Rk4] {
        let x = oracle_samples(SamplerKind::ProbabilityFlow(solver), 2);
        let w1 = w1_to_normal(&x, DATA_STD);
        assert!(w1 <= 0.05, "{solver:?}: W1 {w1}");
    }
}

#[test]
fn reverse_sde_mmd_is_within_twice_the_null() {
    let n = 2000;
    let model = GaussianScore {
        dim: 1,
        data_std: DATA_STD,
    };
    let cfg = SamplerConfig::default();
    let generated =
        sample(&model, &GuidanceSpec::unconditional(), &DiffusionSchedule::default(), &cfg, n, 3).unwrap();
    let draw = |seed: u64| -> Vec<f64> {
        let mut r = rng::stream(seed, 0);
        (0..n).map(|_| DATA_STD * r.sample::<f64, _>(StandardNormal)).collect()
    };
    let target = draw(10);
    let gen_mmd = energy_mmd(&generated, &target, 1, MmdEstimator::V).unwrap().value;
    // average null over a few independent pairs
    let null: f64 = (0..5)
        .map(|k| energy_mmd(&draw(20 + k), &draw(40 + k), 1, MmdEstimator::V).unwrap().value)
        .sum::<f64>()
        / 5.0;
    assert!(gen_mmd <= 2.0 * null, "generated {gen_mmd:e} vs null {null:e}");
}

#[test]
fn forward_marginal_mean_and_variance() {
    let schedule = DiffusionSchedule::default();
    let x0 = [0.8, -1.3];
    let draws = 100_000;
    for (k, &t) in [0.01, 0.3, 1.0, 4.0].iter().enumerate() {
        let mut r = rng::stream(77, k as u64);
        let mut sum = [0.0; 2];
        let mut sq = [0.0; 2];
        for _ in 0..draws {
            let (xt, _) = forward_perturb(&schedule, &x0, t, &mut r).unwrap();
            for i in 0..2 {
                sum[i] += xt[i];
                sq[i] += xt[i] * xt[i];
            }
        }
        let var = -(-2.0 * t).exp_m1();
        for i in 0..2 {
            let n = draws as f64;
            let mean = sum[i] / n;
            let emp_var = sq[i] / n - mean * mean;
            let mean_se = (var / n).sqrt();
            // variance of the sample variance of a Gaussian is 2 v^2 / (n - 1)
            let var_se = (2.0 * var * var / (n - 1.0)).sqrt();
            assert!((mean - (-t).exp() * x0[i]).abs() <= 3.0 * mean_se, "t {t}: mean {mean}");
            assert!((emp_var - var).abs() <= 3.0 * var_se, "t {t}: var {emp_var} vs {var}");
        }
    }
}
