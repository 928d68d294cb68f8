//! Moment and two-sample checks of the Lie-group Langevin sampler against
//! exact Haar moments and the QR oracle.

use qmirror_core::linalg::ComplexMatrix;
use qmirror_core::metrics::{energy_mmd, MmdEstimator};
use qmirror_core::quantum::{haar_unitaries_lie, haar_unitary_lie, haar_unitary_qr, LieSamplerConfig, UnitaryMatrix};
use qmirror_core::rng;
use qmirror_core::Complex64;

fn unitarity_defect(u: &UnitaryMatrix) -> f64 {
    let m = u.as_matrix();
    let p = m.adjoint().matmul(m);
    let id = ComplexMatrix::identity(m.dim());
    p.sub(&id).as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn power_trace(u: &UnitaryMatrix, k: usize) -> Complex64 {
    let mut p = u.clone();
    for _ in 1..k {
        p = p.matmul(u);
    }
    p.trace()
}

fn flatten(us: &[UnitaryMatrix]) -> Vec<f64> {
    us.iter()
        .flat_map(|u| u.as_matrix().as_slice().iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>())
        .collect()
}

#[test]
fn lie_chain_matches_haar_power_trace_moments() {
    // E|Tr U^k|^2 = min(k, n) under Haar measure on U(n)
    let n = 4;
    let count = 4000;
    let us = haar_unitaries_lie(n, count, &LieSamplerConfig::default(), &mut rng::stream(1, 0)).unwrap();
    for k in 1..=3 {
        let m: f64 = us.iter().map(|u| power_trace(u, k).norm_sqr()).sum::<f64>() / count as f64;
        let expected = k.min(n) as f64;
        assert!((m - expected).abs() <= 0.1 * expected, "k {k}: {m} vs {expected}");
    }
    let mean_trace: Complex64 = us.iter().map(UnitaryMatrix::trace).sum::<Complex64>() / count as f64;
    assert!(mean_trace.norm() < 0.1, "{mean_trace}");
    assert!(us.iter().all(|u| unitarity_defect(u) <= 1e-10));
}

#[test]
fn qr_oracle_matches_haar_moments() {
    let n = 4;
    let count = 4000;
    let mut r = rng::stream(2, 0);
    let us: Vec<_> = (0..count).map(|_| haar_unitary_qr(n, &mut r)).collect();
    for k in 1..=3 {
        let m: f64 = us.iter().map(|u| power_trace(u, k).norm_sqr()).sum::<f64>() / count as f64;
        assert!((m - k as f64).abs() <= 0.1 * k as f64, "k {k}: {m}");
    }
}

#[test]
fn lie_and_qr_are_indistinguishable_in_energy_distance() {
    let n = 2;
    let count = 5000;
    let lie = haar_unitaries_lie(n, count, &LieSamplerConfig::default(), &mut rng::stream(3, 0)).unwrap();
    let mut r = rng::stream(4, 0);
    let qr_a: Vec<_> = (0..count).map(|_| haar_unitary_qr(n, &mut r)).collect();
    let qr_b: Vec<_> = (0..count).map(|_| haar_unitary_qr(n, &mut r)).collect();
    let d = 2 * n * n;
    let cross = energy_mmd(&flatten(&lie), &flatten(&qr_a), d, MmdEstimator::V).unwrap().value;
    let null = energy_mmd(&flatten(&qr_b), &flatten(&qr_a), d, MmdEstimator::V).unwrap().value;
    assert!(cross <= 3.0 * null, "lie-vs-qr {cross:e}, qr-vs-qr {null:e}");
}

#[test]
fn long_trajectories_stay_unitary() {
    let cfg = LieSamplerConfig {
        burn_in_steps: 50_000,
        ..Default::default()
    };
    let u = haar_unitary_lie(3, &cfg, &mut rng::stream(5, 0)).unwrap();
    assert!(unitarity_defect(&u) <= 1e-10);
}
