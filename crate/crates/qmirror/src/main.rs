use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qmirror::commands;
use qmirror::config::RunConfig;
use qmirror::format::{CheckpointFile, DatasetFile};
use qmirror::report::{write_observables, write_training_log};
use qmirror_core::diffusion::ValiditySummary;
use qmirror_core::quantum::StateClass;

/// Mirror diffusion for quantum density matrices.
#[derive(Parser)]
#[command(name = "qmirror", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set train.learning_rate=0.002`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled training set.
    Gendata {
        #[arg(long)]
        qubits: Option<usize>,
        /// Records per class: product,pairwise,full.
        #[arg(long)]
        counts: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a score model on a dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Total iterations, counting those already in `--resume`.
        #[arg(long)]
        iterations: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Continue from this checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Training-log CSV.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Train on plain vectorized matrices instead of the mirror space.
        #[arg(long)]
        no_mirror: bool,
    },
    /// Generate states from a checkpoint.
    Sample {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        guidance: Option<f64>,
        /// Class weights w1,w2,w3 (convex).
        #[arg(long)]
        label: Option<String>,
        /// Decode without the mirror map (checkpoint must be trained without it).
        #[arg(long)]
        no_mirror: bool,
        /// sde or ode.
        #[arg(long)]
        sampler: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare generated states with a reference set.
    Eval {
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Report JSON.
        #[arg(long)]
        report: PathBuf,
        /// Per-sample observables CSV.
        #[arg(long)]
        observables: Option<PathBuf>,
    },
}

/// Exit status when an evaluation gate bound is exceeded.
const GATE_FAILURE: u8 = 2;

fn resolve(common: &Common, flags: &[(&str, Option<String>)]) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    for kv in &common.overrides {
        cfg.apply_override(kv)?;
    }
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

fn s<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

fn print_summary(s: &ValiditySummary) {
    println!(
        "validity: {}/{} valid, {} PSD violations, {} trace failures, violation rate {:.6}",
        s.valid,
        s.total,
        s.psd_violations,
        s.trace_failures,
        s.violation_rate()
    );
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gendata {
            qubits,
            counts,
            seed,
            out,
        } => {
            let cfg = resolve(
                &cli.common,
                &[("data.qubits", s(&qubits)), ("data.counts", counts), ("data.seed", s(&seed))],
            )?;
            let g = commands::gendata(&cfg)?;
            g.file.save(&out).with_context(|| format!("writing {}", out.display()))?;
            for class in StateClass::ALL {
                println!("{}: {}", class.name(), g.class_counts[class.index()]);
            }
            print_summary(&g.summary);
        }
        Command::Train {
            data,
            out,
            iterations,
            seed,
            resume,
            log,
            no_mirror,
        } => {
            let mirror = no_mirror.then(|| "false".to_string());
            let cfg = resolve(
                &cli.common,
                &[
                    ("train.iterations", s(&iterations)),
                    ("train.seed", s(&seed)),
                    ("mirror.enabled", mirror),
                ],
            )?;
            let dataset = DatasetFile::load(&data).with_context(|| format!("reading {}", data.display()))?;
            let resume = resume
                .map(|p| CheckpointFile::load(&p).with_context(|| format!("reading {}", p.display())))
                .transpose()?;
            let (ck, rows) = commands::train(&cfg, &dataset, resume, |r| {
                println!("iteration {} loss {:.6} lr {:.3e}", r.iteration, r.loss, r.lr);
            })?;
            ck.save(&out).with_context(|| format!("writing {}", out.display()))?;
            if let Some(path) = log {
                write_training_log(create(&path)?, &rows)?;
            }
            println!(
                "trained {} iterations, average loss {:.6}",
                ck.checkpoint.iterations, ck.checkpoint.final_loss
            );
        }
        Command::Sample {
            checkpoint,
            out,
            count,
            steps,
            guidance,
            label,
            no_mirror,
            sampler,
            seed,
        } => {
            let cfg = resolve(
                &cli.common,
                &[
                    ("sample.count", s(&count)),
                    ("sample.steps", s(&steps)),
                    ("sample.guidance", s(&guidance)),
                    ("sample.label", label),
                    ("sample.sampler", sampler),
                    ("sample.seed", s(&seed)),
                ],
            )?;
            let ck = CheckpointFile::load(&checkpoint).with_context(|| format!("reading {}", checkpoint.display()))?;
            let g = commands::sample(&cfg, &ck, no_mirror)?;
            g.file.save(&out).with_context(|| format!("writing {}", out.display()))?;
            println!("decode path: {}", if g.mirror { "mirror" } else { "raw" });
            print_summary(&g.summary);
        }
        Command::Eval {
            generated,
            reference,
            report,
            observables,
        } => {
            let cfg = resolve(&cli.common, &[])?;
            let load = |p: &Path| DatasetFile::load(p).with_context(|| format!("reading {}", p.display()));
            let e = commands::eval(&cfg, &load(&generated)?, &load(&reference)?)?;
            e.report.save(&report)?;
            if let Some(path) = observables {
                write_observables(create(&path)?, &e.observables)?;
            }
            let r = &e.report;
            println!(
                "swd {:.6e} mswd {:.6e} w1 {:.6e} energy_mmd {:.6e} negativity_w1 {:.6e}",
                r.swd, r.mswd, r.w1, r.energy_mmd_clamped, r.negativity_w1
            );
            if !e.passed() {
                for f in &r.gate_failures {
                    eprintln!("gate: {} = {:.6e} exceeds {:.6e}", f.metric, f.value, f.bound);
                }
                return Ok(ExitCode::from(GATE_FAILURE));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
