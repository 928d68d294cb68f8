//! Round-trip properties of the binary formats on arbitrary contents.

use proptest::prelude::*;
use qmirror::config::RunConfig;
use qmirror::format::{CheckpointFile, DatasetFile};
use qmirror_core::diffusion::{AdamState, Checkpoint, DiffusionSchedule, ScoreArch, Standardization, TrainConfig};
use qmirror_core::linalg::{ComplexMatrix, HermitianMatrix};
use qmirror_core::mirror::MirrorConfig;
use qmirror_core::quantum::ClassLabel;
use qmirror_core::Complex64;

fn hermitian(dim: usize, vals: &[f64]) -> HermitianMatrix {
    let m = ComplexMatrix::from_fn(dim, |i, j| {
        let k = 2 * (i * dim + j);
        Complex64::new(vals[k], vals[k + 1])
    });
    HermitianMatrix::hermitian_part(&m)
}

fn dataset_strategy() -> impl Strategy<Value = DatasetFile> {
    (1usize..=3, 0usize..6, any::<u64>(), any::<bool>(), any::<bool>()).prop_flat_map(
        |(qubits, count, seed, iso, labelled)| {
            let dim = 1 << qubits;
            (
                prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 2 * dim * dim), count),
                prop::collection::vec(0.0f64..1.0, count),
            )
                .prop_map(move |(mats, ws)| DatasetFile {
                    dim,
                    labels: labelled.then(|| {
                        ws.iter()
                            .map(|&w| ClassLabel::new([w, 0.0, 1.0 - w]).unwrap())
                            .collect()
                    }),
                    matrices: mats.iter().map(|v| hermitian(dim, v)).collect(),
                    seed,
                    isometric_scaling: iso,
                    config_text: RunConfig::default().render(),
                })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dataset_round_trip(f in dataset_strategy()) {
        let mut a = Vec::new();
        f.write_to(&mut a).unwrap();
        let back = DatasetFile::read_from(&mut a.as_slice()).unwrap();
        prop_assert_eq!(&back, &f);
        let mut b = Vec::new();
        back.write_to(&mut b).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn checkpoint_round_trip(
        seed in any::<u64>(),
        lr in 1e-6f64..1.0,
        iterations in 0u64..1_000_000,
        loss in prop::num::f64::NORMAL,
        iso in any::<bool>(),
        enabled in any::<bool>(),
        fill in -10.0f64..10.0,
    ) {
        let arch = ScoreArch {
            input_dim: 4,
            hidden_dim: 8,
            residual_blocks: 1,
            time_embed_dim: 4,
            label_dim: 3,
            norm_groups: 2,
        };
        let n = arch.num_params();
        let series = |k: f64| (0..n).map(|i| fill * k + i as f64 * 1e-3).collect::<Vec<_>>();
        let ck = Checkpoint {
            arch,
            schedule: DiffusionSchedule { t_min: 1e-3, t_max: 4.0 + lr },
            mirror: MirrorConfig { isometric_scaling: iso, enabled },
            train: TrainConfig { seed, learning_rate: lr, iterations, ..Default::default() },
            standardization: Standardization {
                mean: vec![fill, 0.1, -0.2, 0.3],
                scale: vec![1.0, 2.5, lr, 1e-7],
            },
            params: series(1.0),
            iterations,
            final_loss: loss,
            optimizer: AdamState { step: iterations, m: series(0.5), v: series(0.25).iter().map(|x| x.abs()).collect() },
        };
        let file = CheckpointFile::new(&RunConfig::default(), ck.clone());
        let mut a = Vec::new();
        file.write_to(&mut a).unwrap();
        let back = CheckpointFile::read_from(&mut a.as_slice()).unwrap();
        prop_assert_eq!(&back.checkpoint, &ck);
        let mut b = Vec::new();
        back.write_to(&mut b).unwrap();
        prop_assert_eq!(a, b);
    }
}
