//! End-to-end runs of the `qmirror` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qmirror::config::RunConfig;
use qmirror::format::{CheckpointFile, DatasetFile};
use qmirror::report::{read_training_log, ReportFile};
use qmirror_core::diffusion::{ScoreNetwork, VALIDITY_TOLERANCE};
use qmirror_core::linalg::validate_density;
use qmirror_core::quantum::generate_baseline_dataset;
use qmirror_core::rng;
use tempfile::TempDir;

const SMALL_MODEL: &str = "\
arch.hidden_dim = 32
arch.residual_blocks = 1
arch.time_embed_dim = 8
arch.norm_groups = 4
train.batch_size = 32
data.unitary_sampler = qr
sample.steps = 50
eval.projections = 64
eval.mswd_iterations = 50
eval.mswd_restarts = 2
";

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        let s = Self {
            dir: tempfile::tempdir().unwrap(),
        };
        std::fs::write(s.path("run.cfg"), SMALL_MODEL).unwrap();
        s
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        let cfg = self.path("run.cfg");
        Command::new(env!("CARGO_BIN_EXE_qmirror"))
            .arg("--config")
            .arg(&cfg)
            .args(args)
            .current_dir(self.dir.path())
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }
}

fn bytes(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn gendata_is_deterministic_and_valid() {
    let s = Sandbox::new();
    let args = |out: &'static str| ["gendata", "--qubits", "2", "--counts", "100,100,100", "--seed", "7", "--out", out];
    let stdout = s.ok(&args("a.qsd"));
    s.ok(&args("b.qsd"));
    assert_eq!(bytes(&s.path("a.qsd")), bytes(&s.path("b.qsd")));
    assert!(stdout.contains("product: 100"));
    assert!(stdout.contains("300/300 valid"));

    let f = DatasetFile::load(&s.path("a.qsd")).unwrap();
    assert_eq!((f.len(), f.dim, f.seed), (300, 4, 7));
    assert!(f
        .matrices
        .iter()
        .all(|m| validate_density(m.as_matrix(), VALIDITY_TOLERANCE).passes(VALIDITY_TOLERANCE)));
    let cfg = RunConfig::parse(&f.config_text).unwrap();
    assert_eq!(cfg.data.counts, [100, 100, 100]);
    assert_eq!(cfg.data.seed, 7);

    s.ok(&["gendata", "--qubits", "2", "--counts", "100,100,100", "--seed", "8", "--out", "c.qsd"]);
    assert_ne!(bytes(&s.path("a.qsd")), bytes(&s.path("c.qsd")));
}

#[test]
fn gendata_with_no_records_writes_a_valid_header() {
    let s = Sandbox::new();
    s.ok(&["gendata", "--counts", "0,0,0", "--out", "e.qsd"]);
    let f = DatasetFile::load(&s.path("e.qsd")).unwrap();
    assert!(f.is_empty());
    assert_eq!(f.dim, 4);
}

#[test]
fn bad_arguments_fail_cleanly() {
    let s = Sandbox::new();
    for args in [
        &["gendata", "--counts", "1,2", "--out", "x.qsd"][..],
        &["gendata", "--set", "train.nonsense=1", "--out", "x.qsd"],
        &["sample", "--checkpoint", "missing.qck", "--out", "x.qsd"],
    ] {
        let out = s.run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn zero_iterations_store_the_initialization() {
    let s = Sandbox::new();
    s.ok(&["gendata", "--qubits", "1", "--counts", "20,0,0", "--out", "d.qsd"]);
    s.ok(&["train", "--data", "d.qsd", "--out", "m.qck", "--iterations", "0", "--seed", "4"]);
    let ck = CheckpointFile::load(&s.path("m.qck")).unwrap().checkpoint;
    assert_eq!(ck.iterations, 0);
    assert!(ck.final_loss.is_nan());
    let fresh = ScoreNetwork::init(ck.arch, &mut rng::stream(rng::mix(4, 0x696e_6974), 0)).unwrap();
    assert_eq!(ck.params, fresh.params());
    assert!(ck.optimizer.m.iter().all(|&m| m == 0.0));
}

#[test]
fn resumed_training_is_bit_exact() {
    let s = Sandbox::new();
    s.ok(&["gendata", "--qubits", "2", "--counts", "30,30,0", "--out", "d.qsd"]);
    s.ok(&["train", "--data", "d.qsd", "--out", "full.qck", "--iterations", "120"]);
    s.ok(&["train", "--data", "d.qsd", "--out", "half.qck", "--iterations", "50"]);
    s.ok(&["train", "--data", "d.qsd", "--out", "resumed.qck", "--iterations", "120", "--resume", "half.qck"]);
    assert_eq!(bytes(&s.path("full.qck")), bytes(&s.path("resumed.qck")));
    assert_ne!(bytes(&s.path("full.qck")), bytes(&s.path("half.qck")));

    let out = s.run(&["train", "--data", "d.qsd", "--out", "x.qck", "--iterations", "10", "--resume", "half.qck"]);
    assert!(!out.status.success());
}

#[test]
fn training_rejects_a_mirror_mismatch() {
    let s = Sandbox::new();
    s.ok(&["gendata", "--qubits", "1", "--counts", "10,0,0", "--out", "d.qsd"]);
    let out = s.run(&[
        "train",
        "--data",
        "d.qsd",
        "--out",
        "m.qck",
        "--iterations",
        "1",
        "--set",
        "mirror.isometric_scaling=false",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("isometric_scaling"));
}

#[test]
fn training_log_trends_downward_on_one_qubit() {
    let s = Sandbox::new();
    s.ok(&["gendata", "--qubits", "1", "--counts", "500,0,0", "--out", "d.qsd"]);
    s.ok(&[
        "train",
        "--data",
        "d.qsd",
        "--out",
        "m.qck",
        "--iterations",
        "3000",
        "--log",
        "log.csv",
        "--set",
        "train.standardize=false",
    ]);
    let rows = read_training_log(std::fs::File::open(s.path("log.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().enumerate().all(|(i, r)| r.iteration == 100 * (i as u64 + 1)));
    // rows are 100-iteration means; five of them span 500 iterations
    let windows: Vec<f64> = rows.chunks(5).map(|c| c.iter().map(|r| r.loss).sum::<f64>() / 5.0).collect();
    assert!(windows.last() < windows.first(), "{windows:?}");
    let falls = windows.windows(2).filter(|w| w[1] < w[0]).count();
    assert!(falls * 2 >= windows.len() - 1, "{windows:?}");
}

#[test]
fn sampling_paths() {
    let s = Sandbox::new();
    s.ok(&["gendata", "--qubits", "2", "--counts", "40,40,0", "--out", "d.qsd"]);
    s.ok(&["train", "--data", "d.qsd", "--out", "m.qck", "--iterations", "50"]);
    s.ok(&["train", "--data", "d.qsd", "--out", "raw.qck", "--iterations", "50", "--no-mirror"]);

    let stdout = s.ok(&["sample", "--checkpoint", "m.qck", "--out", "g.qsd", "--count", "300", "--label", "0.5,0.5,0"]);
    assert!(stdout.contains("decode path: mirror"));
    assert!(stdout.contains("300/300 valid"));
    let g = DatasetFile::load(&s.path("g.qsd")).unwrap();
    assert_eq!(g.len(), 300);
    assert!(g.labels.as_ref().unwrap().iter().all(|l| l.weights() == &[0.5, 0.5, 0.0]));
    assert!(g
        .matrices
        .iter()
        .all(|m| validate_density(m.as_matrix(), VALIDITY_TOLERANCE).passes(VALIDITY_TOLERANCE)));

    s.ok(&["sample", "--checkpoint", "m.qck", "--out", "g2.qsd", "--count", "300", "--label", "0.5,0.5,0"]);
    assert_eq!(bytes(&s.path("g.qsd")), bytes(&s.path("g2.qsd")));

    let out = s.run(&["sample", "--checkpoint", "m.qck", "--out", "x.qsd", "--no-mirror"]);
    assert!(!out.status.success());
    let out = s.run(&["sample", "--checkpoint", "m.qck", "--out", "x.qsd", "--label", "0.7,0.7,0"]);
    assert!(!out.status.success());

    let stdout = s.ok(&["sample", "--checkpoint", "raw.qck", "--out", "r.qsd", "--count", "300", "--no-mirror"]);
    assert!(stdout.contains("decode path: raw"));
    let rate: f64 = stdout
        .split("violation rate ")
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(rate > 0.0, "{stdout}");
    assert!(DatasetFile::load(&s.path("r.qsd")).unwrap().labels.is_none());
}

#[test]
fn eval_identical_sets_pass_and_the_baseline_trips_the_gate() {
    let s = Sandbox::new();
    s.ok(&["gendata", "--qubits", "2", "--counts", "100,100,0", "--seed", "3", "--out", "d.qsd"]);
    let baseline = generate_baseline_dataset(200, 2, 5).unwrap();
    DatasetFile::from_state_dataset(&baseline, &RunConfig::default())
        .save(&s.path("base.qsd"))
        .unwrap();

    let gate = [
        "--set",
        "eval.max_swd=0.01",
        "--set",
        "eval.max_mswd=0.01",
        "--set",
        "eval.max_energy_mmd=0.001",
        "--set",
        "eval.max_negativity_w1=0.001",
    ];
    let mut args = vec!["eval", "--generated", "d.qsd", "--reference", "d.qsd", "--report", "same.json"];
    args.extend_from_slice(&["--observables", "obs.csv"]);
    args.extend_from_slice(&gate);
    s.ok(&args);
    let same = ReportFile::load(&s.path("same.json")).unwrap();
    assert!(same.swd <= 1e-12 && same.mswd <= 1e-12 && same.w1 <= 1e-12);
    assert!(same.energy_mmd.abs() <= 1e-12 && same.negativity_w1 <= 1e-12);
    assert!(same.gate_failures.is_empty());
    // the report echoes the resolved configuration
    let echoed = same.run_config().unwrap();
    assert_eq!(echoed.eval.gate.swd, Some(0.01));
    assert_eq!(echoed.arch.hidden_dim, 32);

    let obs = std::fs::read_to_string(s.path("obs.csv")).unwrap();
    assert_eq!(obs.lines().count(), 201);
    assert!(obs.starts_with("sample_id,class_label,eig1,eig2,primal_re_11,primal_re_22,dual_re_11,dual_re_22,negativity\n"));

    let mut args = vec!["eval", "--generated", "base.qsd", "--reference", "d.qsd", "--report", "base.json"];
    args.extend_from_slice(&gate);
    let out = s.run(&args);
    assert_eq!(out.status.code(), Some(2));
    let base = ReportFile::load(&s.path("base.json")).unwrap();
    assert!(!base.gate_failures.is_empty());
    assert!(base.swd > 10.0 * same.swd.max(1e-6));

    // without bounds the same comparison exits cleanly
    s.ok(&["eval", "--generated", "base.qsd", "--reference", "d.qsd", "--report", "nogate.json"]);
}
