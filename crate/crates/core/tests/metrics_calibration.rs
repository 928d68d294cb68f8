//! Null calibration and dominance checks for the randomized metrics.

use qmirror_core::metrics::{
    energy_mmd, max_sliced_wasserstein, projected_w1, sliced_wasserstein, MmdEstimator, MswdConfig,
};
use qmirror_core::rng;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(n: usize, dim: usize, shift: &[f64], seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, 0);
    (0..n * dim)
        .map(|k| r.sample::<f64, _>(StandardNormal) + shift[k % dim])
        .collect()
}

#[test]
fn swd_of_resampled_gaussian_is_inside_the_null_band() {
    let (n, d) = (300, 4);
    let zero = [0.0; 4];
    let mut null: Vec<f64> = (0..50)
        .map(|k| {
            sliced_wasserstein(&gaussian(n, d, &zero, 100 + k), &gaussian(n, d, &zero, 200 + k), d, 128, k).unwrap()
        })
        .collect();
    null.sort_by(f64::total_cmp);
    let q95 = null[47];
    let observed = sliced_wasserstein(&gaussian(n, d, &zero, 1), &gaussian(n, d, &zero, 2), d, 128, 9).unwrap();
    assert!(observed <= q95, "{observed} > {q95}");
    let shifted = sliced_wasserstein(&gaussian(n, d, &zero, 1), &gaussian(n, d, &[0.5; 4], 2), d, 128, 9).unwrap();
    assert!(shifted > q95);
}

#[test]
fn mswd_dominates_swd_and_coordinate_marginals() {
    let cfg = MswdConfig::default();
    for k in 0..20u64 {
        let d = 2 + (k % 4) as usize;
        let mut r = rng::stream(k, 5);
        let shift: Vec<f64> = (0..d).map(|_| r.random_range(-0.5..0.5)).collect();
        let a = gaussian(80, d, &vec![0.0; d], 300 + k);
        let b = gaussian(60, d, &shift, 400 + k);
        let swd = sliced_wasserstein(&a, &b, d, 128, k).unwrap();
        let mswd = max_sliced_wasserstein(&a, &b, d, &cfg, k).unwrap();
        assert!(mswd >= swd - 1e-9);
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            assert!(mswd >= projected_w1(&a, &b, d, &e).unwrap() - 1e-9);
        }
    }
}

#[test]
fn energy_mmd_grows_with_the_mean_shift() {
    let n = 5000;
    let base = gaussian(n, 2, &[0.0, 0.0], 1);
    let mut last = f64::NEG_INFINITY;
    for (k, mu) in [0.0, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let other = gaussian(n, 2, &[mu / 2f64.sqrt(), mu / 2f64.sqrt()], 10 + k as u64);
        let v = energy_mmd(&base, &other, 2, MmdEstimator::V).unwrap().value;
        assert!(v > last, "shift {mu}: {v} <= {last}");
        last = v;
    }
}
