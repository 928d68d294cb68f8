use crate::error::{Error, Result};
use crate::math;

/// Estimator for the squared energy distance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MmdEstimator {
    /// Biased V-statistic: within-sample means include the zero diagonal.
    #[default]
    V,
    /// Unbiased U-statistic: within-sample means skip `i == j`.
    U,
}

impl MmdEstimator {
    pub fn name(self) -> &'static str {
        match self {
            Self::V => "v",
            Self::U => "u",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "v" | "V" => Some(Self::V),
            "u" | "U" => Some(Self::U),
            _ => None,
        }
    }
}

/// Raw estimate and its value truncated at zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MmdEstimate {
    pub value: f64,
    pub clamped: f64,
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    math::sqrt(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
}

fn within_mean(x: &[f64], dim: usize, est: MmdEstimator) -> f64 {
    let n = x.len() / dim;
    let mut total = 0.0;
    for i in 0..n {
        let xi = &x[i * dim..(i + 1) * dim];
        for j in (i + 1)..n {
            total += dist(xi, &x[j * dim..(j + 1) * dim]);
        }
    }
    let pairs = match est {
        MmdEstimator::V => (n * n) as f64,
        MmdEstimator::U if n > 1 => (n * (n - 1)) as f64,
        MmdEstimator::U => return 0.0,
    };
    2.0 * total / pairs
}

/// Squared MMD under the energy kernel `k(x, y) = -|x - y|`:
/// `2 E|a - b| - E|a - a'| - E|b - b'|`. `a` and `b` are row-major point
/// clouds of width `dim`.
pub fn energy_mmd(a: &[f64], b: &[f64], dim: usize, est: MmdEstimator) -> Result<MmdEstimate> {
    if dim == 0 || a.len() % dim != 0 || b.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: if dim == 0 || a.len() % dim != 0 { a.len() } else { b.len() },
        });
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("point cloud"));
    }
    let (na, nb) = (a.len() / dim, b.len() / dim);
    let mut cross = 0.0;
    for ra in a.chunks_exact(dim) {
        for rb in b.chunks_exact(dim) {
            cross += dist(ra, rb);
        }
    }
    cross /= (na * nb) as f64;
    let value = 2.0 * cross - within_mean(a, dim, est) - within_mean(b, dim, est);
    Ok(MmdEstimate {
        value,
        clamped: value.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use alloc::vec::Vec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn identical_multisets_give_zero() {
        let a = [0.1, 0.2, -0.3, 0.4, 1.0, 1.0];
        let b = [1.0, 1.0, 0.1, 0.2, -0.3, 0.4];
        let m = energy_mmd(&a, &b, 2, MmdEstimator::V).unwrap();
        assert!(m.value.abs() < 1e-12);
    }

    #[test]
    fn point_masses() {
        let m = energy_mmd(&[0.0, 0.0], &[3.0, 4.0], 2, MmdEstimator::V).unwrap();
        assert!((m.value - 10.0).abs() < 1e-12);
        assert_eq!(m.clamped, m.value);
    }

    #[test]
    fn u_statistic_can_go_negative_and_is_clamped() {
        let a = [0.0, 1.0];
        let b = [0.0, 1.0];
        let m = energy_mmd(&a, &b, 1, MmdEstimator::U).unwrap();
        // cross 0.5, within 1 each
        assert!((m.value - -1.0).abs() < 1e-12);
        assert_eq!(m.clamped, 0.0);
    }

    #[test]
    fn grows_with_mean_shift() {
        let n = 1000;
        let draw = |seed: u64, shift: f64| -> Vec<f64> {
            let mut r = rng::stream(seed, 0);
            (0..2 * n).map(|_| r.sample::<f64, _>(StandardNormal) + shift).collect()
        };
        let base = draw(1, 0.0);
        let mut last = -1.0;
        for (k, mu) in [0.0, 0.5, 1.0, 2.0].into_iter().enumerate() {
            let v = energy_mmd(&base, &draw(10 + k as u64, mu), 2, MmdEstimator::V).unwrap().value;
            assert!(v > last, "{mu}: {v} <= {last}");
            last = v;
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(energy_mmd(&[1.0, 2.0, 3.0], &[1.0, 2.0], 2, MmdEstimator::V).is_err());
        assert!(energy_mmd(&[], &[1.0], 1, MmdEstimator::V).is_err());
    }
}
