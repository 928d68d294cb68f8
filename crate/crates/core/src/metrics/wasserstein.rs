use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{math, rng};

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Monotone (quantile) coupling of two sample sets: triples
/// `(index into a, index into b, mass)` with total mass one.
fn quantile_coupling(a: &[f64], b: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut ia: Vec<usize> = (0..a.len()).collect();
    let mut ib: Vec<usize> = (0..b.len()).collect();
    ia.sort_by(|&i, &j| a[i].total_cmp(&a[j]));
    ib.sort_by(|&i, &j| b[i].total_cmp(&b[j]));
    let (na, nb) = (a.len(), b.len());
    if na == nb {
        let w = 1.0 / na as f64;
        return ia.into_iter().zip(ib).map(|(i, j)| (i, j, w)).collect();
    }
    // walk the merged grid of CDF breakpoints k/na and l/nb, in integer units of 1/(na nb)
    let mut out = Vec::with_capacity(na + nb);
    let (mut k, mut l) = (0usize, 0usize);
    let (mut left_a, mut left_b) = (nb, na);
    let total = (na * nb) as f64;
    while k < na && l < nb {
        let take = left_a.min(left_b);
        out.push((ia[k], ib[l], take as f64 / total));
        left_a -= take;
        left_b -= take;
        if left_a == 0 {
            k += 1;
            left_a = nb;
        }
        if left_b == 0 {
            l += 1;
            left_b = na;
        }
    }
    out
}

/// Exact 1-Wasserstein distance between two empirical distributions on the
/// line, `integral |F_a^{-1}(u) - F_b^{-1}(u)| du`.
pub fn w1_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("w1 sample"));
    }
    if a.len() == b.len() {
        let (sa, sb) = (sorted(a), sorted(b));
        return Ok(sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64);
    }
    Ok(quantile_coupling(a, b)
        .into_iter()
        .map(|(i, j, w)| w * (a[i] - b[j]).abs())
        .sum())
}

fn check_pair(a: &[f64], b: &[f64], dim: usize) -> Result<()> {
    if dim == 0 || a.len() % dim != 0 || b.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: if a.len() % dim.max(1) != 0 { a.len() } else { b.len() },
        });
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("point cloud"));
    }
    Ok(())
}

fn project(x: &[f64], dim: usize, theta: &[f64]) -> Vec<f64> {
    x.chunks_exact(dim)
        .map(|row| row.iter().zip(theta).map(|(v, t)| v * t).sum())
        .collect()
}

fn normalize(v: &mut [f64]) -> bool {
    let n = math::sqrt(v.iter().map(|x| x * x).sum());
    if n > 0.0 && n.is_finite() {
        for x in v.iter_mut() {
            *x /= n;
        }
        true
    } else {
        false
    }
}

fn random_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if normalize(&mut v) {
            return v;
        }
    }
}

/// Projected distance along the unit direction `theta`.
pub fn projected_w1(a: &[f64], b: &[f64], dim: usize, theta: &[f64]) -> Result<f64> {
    check_pair(a, b, dim)?;
    w1_1d(&project(a, dim, theta), &project(b, dim, theta))
}

/// Mean of the projected 1-D distances over `projections` uniformly random
/// unit directions. `a` and `b` are row-major point clouds of width `dim`.
/// Direction `k` is drawn from stream `k` of `seed`.
pub fn sliced_wasserstein(a: &[f64], b: &[f64], dim: usize, projections: usize, seed: u64) -> Result<f64> {
    check_pair(a, b, dim)?;
    if projections == 0 {
        return Err(Error::InvalidConfig("at least one projection is required".into()));
    }
    let mut total = 0.0;
    for k in 0..projections {
        let theta = random_direction(dim, &mut rng::stream(seed, k as u64));
        total += w1_1d(&project(a, dim, &theta), &project(b, dim, &theta))?;
    }
    Ok(total / projections as f64)
}

/// Projected gradient ascent settings for the max-sliced distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MswdConfig {
    pub iterations: usize,
    pub step_size: f64,
    /// Random initial directions.
    pub restarts: usize,
}

impl Default for MswdConfig {
    fn default() -> Self {
        Self {
            iterations: 200,
            step_size: 0.1,
            restarts: 8,
        }
    }
}

/// Value and ascent direction of the projected distance at `theta`.
fn value_and_gradient(a: &[f64], b: &[f64], dim: usize, theta: &[f64]) -> (f64, Vec<f64>) {
    let pa = project(a, dim, theta);
    let pb = project(b, dim, theta);
    let mut value = 0.0;
    let mut grad = vec![0.0; dim];
    for (i, j, w) in quantile_coupling(&pa, &pb) {
        let diff = pa[i] - pb[j];
        value += w * diff.abs();
        let sign = if diff > 0.0 {
            1.0
        } else if diff < 0.0 {
            -1.0
        } else {
            0.0
        };
        if sign != 0.0 {
            let (ra, rb) = (&a[i * dim..(i + 1) * dim], &b[j * dim..(j + 1) * dim]);
            for k in 0..dim {
                grad[k] += w * sign * (ra[k] - rb[k]);
            }
        }
    }
    (value, grad)
}

/// Maximum over unit directions of the projected 1-D distance, by projected
/// gradient ascent with renormalization after each step.
///
/// Besides `restarts` random directions (stream `k` of `seed`), the ascent
/// also starts from the best coordinate axis and from the difference of the
/// means. Returns the largest value seen.
pub fn max_sliced_wasserstein(a: &[f64], b: &[f64], dim: usize, cfg: &MswdConfig, seed: u64) -> Result<f64> {
    check_pair(a, b, dim)?;
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.restarts + 2);

    let mut best_axis = (0, f64::NEG_INFINITY);
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        let v = projected_w1(a, b, dim, &e)?;
        if v > best_axis.1 {
            best_axis = (k, v);
        }
    }
    let mut axis = vec![0.0; dim];
    axis[best_axis.0] = 1.0;
    starts.push(axis);

    let mean = |x: &[f64]| {
        let n = (x.len() / dim) as f64;
        let mut m = vec![0.0; dim];
        for row in x.chunks_exact(dim) {
            for (mk, v) in m.iter_mut().zip(row) {
                *mk += v / n;
            }
        }
        m
    };
    let mut diff: Vec<f64> = mean(a).iter().zip(mean(b)).map(|(x, y)| x - y).collect();
    if normalize(&mut diff) {
        starts.push(diff);
    }
    for k in 0..cfg.restarts {
        starts.push(random_direction(dim, &mut rng::stream(seed, k as u64)));
    }

    let mut best = 0.0f64;
    for mut theta in starts {
        for _ in 0..cfg.iterations {
            let (value, grad) = value_and_gradient(a, b, dim, &theta);
            best = best.max(value);
            let mut next: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t + cfg.step_size * g).collect();
            if !normalize(&mut next) {
                break;
            }
            theta = next;
        }
        best = best.max(value_and_gradient(a, b, dim, &theta).0);
    }
    Ok(best)
}
