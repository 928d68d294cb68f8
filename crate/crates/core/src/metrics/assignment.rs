use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Minimum-cost perfect matching on a dense `n x n` cost matrix (row-major)
/// by the shortest-augmenting-path Hungarian method with potentials.
/// Returns `assign[row] = column`. O(n^3).
pub fn min_cost_assignment(cost: &[f64], n: usize) -> Result<Vec<usize>> {
    if cost.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            actual: cost.len(),
        });
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidConfig("assignment costs must be finite".into()));
    }
    // 1-based internally; column 0 is the virtual start
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let crow = &cost[(i0 - 1) * n..i0 * n];
            let ui0 = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = crow[j - 1] - ui0 - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[owner[j] - 1] = j - 1;
    }
    Ok(assign)
}

/// Exact empirical 1-Wasserstein distance (Euclidean ground cost) between two
/// equal-size point clouds, as the mean cost of the optimal assignment.
pub fn exact_w1(a: &[f64], b: &[f64], dim: usize) -> Result<f64> {
    if dim == 0 || a.len() % dim != 0 || a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let n = a.len() / dim;
    if n == 0 {
        return Err(Error::Empty("point cloud"));
    }
    let mut cost = vec![0.0; n * n];
    for (i, ra) in a.chunks_exact(dim).enumerate() {
        for (j, rb) in b.chunks_exact(dim).enumerate() {
            cost[i * n + j] = math::sqrt(ra.iter().zip(rb).map(|(x, y)| (x - y) * (x - y)).sum());
        }
    }
    let assign = min_cost_assignment(&cost, n)?;
    Ok(assign.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum::<f64>() / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn brute_force(cost: &[f64], n: usize) -> f64 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        fn rec(k: usize, perm: &mut Vec<usize>, cost: &[f64], n: usize, best: &mut f64) {
            if k == n {
                let c: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
                *best = best.min(c);
                return;
            }
            for i in k..n {
                perm.swap(k, i);
                rec(k + 1, perm, cost, n, best);
                perm.swap(k, i);
            }
        }
        rec(0, &mut perm, cost, n, &mut best);
        best
    }

    #[test]
    fn small_known_case() {
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let a = min_cost_assignment(&cost, 3).unwrap();
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i * 3 + j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn one_dimensional_w1_matches_sorting() {
        let mut r = rng::stream(8, 0);
        let a: Vec<f64> = (0..60).map(|_| r.random::<f64>()).collect();
        let b: Vec<f64> = (0..60).map(|_| r.random::<f64>() * 2.0).collect();
        let exact = exact_w1(&a, &b, 1).unwrap();
        let sorted = super::super::w1_1d(&a, &b).unwrap();
        assert!((exact - sorted).abs() < 1e-12, "{exact} {sorted}");
    }

    #[test]
    fn identical_clouds_are_zero() {
        let a = [0.1, 0.5, -2.0, 3.0, 0.0, 0.0];
        let b = [0.0, 0.0, 0.1, 0.5, -2.0, 3.0];
        assert_eq!(exact_w1(&a, &b, 2).unwrap(), 0.0);
        assert!(exact_w1(&a, &b[..4], 2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn matches_brute_force(n in 1usize..7, seed in any::<u64>()) {
            let mut r = rng::stream(seed, 0);
            let cost: Vec<f64> = (0..n * n).map(|_| r.random_range(0.0..10.0)).collect();
            let a = min_cost_assignment(&cost, n).unwrap();
            let mut seen = vec![false; n];
            for &j in &a { prop_assert!(!seen[j]); seen[j] = true; }
            let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
            prop_assert!((total - brute_force(&cost, n)).abs() < 1e-9);
        }
    }
}
