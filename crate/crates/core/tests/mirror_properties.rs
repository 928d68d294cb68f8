use qmirror_core::linalg::validate_density;
use qmirror_core::mirror::{decode, encode, herm_to_vec, DualVector, MirrorConfig};
use qmirror_core::quantum::{random_density, random_hermitian};
use qmirror_core::rng;
use rand::Rng;
use rand_distr::StandardNormal;

#[test]
fn decode_inverts_encode_on_random_states() {
    let cfg = MirrorConfig::default();
    let mut r = rng::stream(1, 0);
    for n in [4, 16] {
        for _ in 0..1000 {
            let x = random_density(n, 1e-3, 1.0, &mut r);
            let back = decode(&encode(&x, &cfg).unwrap(), &cfg).unwrap();
            let err = back.as_hermitian().sub(x.as_hermitian()).frobenius_norm();
            assert!(err <= 1e-10, "n {n}: {err:e}");
        }
    }
}

#[test]
fn isometric_vectorization_preserves_norms() {
    let cfg = MirrorConfig::default();
    let mut r = rng::stream(2, 0);
    for _ in 0..1000 {
        let y = random_hermitian(4, &mut r);
        let v = herm_to_vec(&y, &cfg);
        assert!((v.norm() - y.frobenius_norm()).abs() <= 1e-12);
    }
}

#[test]
fn arbitrary_dual_vectors_decode_to_states() {
    let cfg = MirrorConfig::default();
    let mut r = rng::stream(3, 0);
    for k in 0..10_000 {
        let scale = [0.1, 1.0, 5.0, 20.0][k % 4];
        let v: Vec<f64> = (0..16).map(|_| scale * r.sample::<f64, _>(StandardNormal)).collect();
        let rho = decode(&DualVector::new(v).unwrap(), &cfg).unwrap();
        let report = validate_density(rho.as_matrix(), 1e-10);
        assert!(report.passes(1e-10), "{report:?}");
    }
}

#[test]
fn plain_and_isometric_layouts_agree_on_diagonals() {
    let mut r = rng::stream(4, 0);
    let y = random_hermitian(4, &mut r);
    let iso = herm_to_vec(&y, &MirrorConfig::default());
    let plain = herm_to_vec(
        &y,
        &MirrorConfig {
            isometric_scaling: false,
            ..Default::default()
        },
    );
    assert_eq!(&iso.as_slice()[..4], &plain.as_slice()[..4]);
    let k = 4 + r.random_range(0..12);
    assert!((iso.as_slice()[k] - std::f64::consts::SQRT_2 * plain.as_slice()[k]).abs() < 1e-15);
}
