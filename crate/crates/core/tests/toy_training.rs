//! Training on one-dimensional Gaussian data, where the score of every
//! forward marginal is known in closed form.

use qmirror_core::diffusion::{
    Conditioning, DiffusionSchedule, ScoreArch, TrainConfig, Trainer, TrainingData,
};
use qmirror_core::mirror::MirrorConfig;
use qmirror_core::rng;
use rand::Rng;
use rand_distr::StandardNormal;

const DATA_STD: f64 = 0.5;

fn analytic_score(x: f64, t: f64) -> f64 {
    let v = DATA_STD * DATA_STD * (-2.0 * t).exp() - (-2.0 * t).exp_m1();
    -x / v
}

fn gaussian_data(n: usize) -> TrainingData {
    let mut r = rng::stream(1, 0);
    TrainingData {
        dim: 1,
        x: (0..n).map(|_| DATA_STD * r.sample::<f64, _>(StandardNormal)).collect(),
        labels: vec![None; n],
        mirror: MirrorConfig::default(),
    }
}

fn arch() -> ScoreArch {
    ScoreArch {
        input_dim: 1,
        hidden_dim: 64,
        residual_blocks: 2,
        time_embed_dim: 16,
        label_dim: 3,
        norm_groups: 8,
    }
}

#[test]
fn learned_score_matches_the_closed_form() {
    let data = gaussian_data(50_000);
    let cfg = TrainConfig {
        batch_size: 512,
        iterations: 4000,
        learning_rate: 3e-3,
        // halved every 1000 steps
        lr_decay: 0.5,
        lr_decay_every: 1000,
        cond_dropout_prob: 0.0,
        standardize: false,
        seed: 3,
        ..Default::default()
    };
    let mut trainer = Trainer::new(&data, arch(), DiffusionSchedule::default(), cfg).unwrap();
    let mut first = None;
    trainer
        .run(cfg.iterations, |e| {
            first.get_or_insert(e.loss);
        })
        .unwrap();
    let ck = trainer.checkpoint();
    assert!(ck.final_loss < first.unwrap());

    let net = ck.network().unwrap();
    let (mut err, mut norm) = (0.0, 0.0);
    for &t in &[0.05f64, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0] {
        let v = DATA_STD * DATA_STD * (-2.0 * t).exp() - (-2.0 * t).exp_m1();
        let xs: Vec<f64> = (-20..=20).map(|k| 2.0 * v.sqrt() * k as f64 / 20.0).collect();
        let ts = vec![t; xs.len()];
        let s = net.score(&xs, &ts, &Conditioning::null(xs.len(), 3)).unwrap();
        for (x, sx) in xs.iter().zip(&s) {
            let exact = analytic_score(*x, t);
            err += (sx - exact) * (sx - exact);
            norm += exact * exact;
        }
    }
    let rel = (err / norm).sqrt();
    assert!(rel <= 0.05, "relative L2 error {rel}");
}
