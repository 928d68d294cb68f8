//! `QCK1` checkpoint files.
//!
//! Little-endian layout:
//!
//! ```text
//! magic "QCK1" | u32 version = 1
//! u32 byte length | canonical configuration text, UTF-8
//! num_params x f64 parameters, segment order
//! u64 training iterations | f64 final loss
//! u64 optimizer step | num_params x f64 first moment | num_params x f64 second moment
//! ```
//!
//! The text block is the resolved run configuration (architecture,
//! schedule, mirror and training keys taken from the checkpoint) followed by
//! `checkpoint.*` keys for the input and label widths, the parameter count
//! and the standardization. Writing is deterministic, so load then save
//! reproduces the file byte for byte.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use qmirror_core::diffusion::{AdamState, Checkpoint, ScoreArch, Standardization};

use super::{read_exact_vec, FormatError, Reader};
use crate::config::{ArchSettings, RunConfig};

pub const MAGIC: &[u8; 4] = b"QCK1";
pub const VERSION: u32 = 1;

/// A checkpoint together with the configuration that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointFile {
    pub config: RunConfig,
    pub checkpoint: Checkpoint,
}

fn floats(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn parse_floats(key: &str, v: &str) -> Result<Vec<f64>, FormatError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| s.trim().parse().map_err(|_| FormatError::Invalid(format!("{key}: {s:?}"))))
        .collect()
}

impl CheckpointFile {
    /// Pairs `checkpoint` with `config`, overwriting the configuration's
    /// architecture, schedule, mirror and training sections with the
    /// checkpoint's own.
    pub fn new(config: &RunConfig, checkpoint: Checkpoint) -> Self {
        let mut config = config.clone();
        let a = checkpoint.arch;
        config.arch = ArchSettings {
            hidden_dim: a.hidden_dim,
            residual_blocks: a.residual_blocks,
            time_embed_dim: a.time_embed_dim,
            norm_groups: a.norm_groups,
        };
        config.schedule = checkpoint.schedule;
        config.mirror = checkpoint.mirror;
        config.train = checkpoint.train;
        Self { config, checkpoint }
    }

    fn header_text(&self) -> String {
        let ck = &self.checkpoint;
        let mut text = self.config.render();
        let _ = writeln!(text, "checkpoint.input_dim = {}", ck.arch.input_dim);
        let _ = writeln!(text, "checkpoint.label_dim = {}", ck.arch.label_dim);
        let _ = writeln!(text, "checkpoint.num_params = {}", ck.params.len());
        let _ = writeln!(text, "checkpoint.standardization_mean = {}", floats(&ck.standardization.mean));
        let _ = writeln!(text, "checkpoint.standardization_scale = {}", floats(&ck.standardization.scale));
        text
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<(), FormatError> {
        let ck = &self.checkpoint;
        let n = ck.params.len();
        if ck.optimizer.m.len() != n || ck.optimizer.v.len() != n {
            return Err(FormatError::Invalid("optimizer state does not match the parameters".into()));
        }
        let text = self.header_text();
        let mut buf = Vec::with_capacity(8 + 4 + text.len() + 8 * (3 * n + 4));
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(text.len() as u32).to_le_bytes());
        buf.extend_from_slice(text.as_bytes());
        let mut put = |xs: &[f64]| {
            for x in xs {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        };
        put(&ck.params);
        buf.extend_from_slice(&ck.iterations.to_le_bytes());
        buf.extend_from_slice(&ck.final_loss.to_le_bytes());
        buf.extend_from_slice(&ck.optimizer.step.to_le_bytes());
        let mut put = |xs: &[f64]| {
            for x in xs {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        };
        put(&ck.optimizer.m);
        put(&ck.optimizer.v);
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, FormatError> {
        let mut r = Reader::new(r);
        r.magic(MAGIC)?;
        let version = r.u32()?;
        if version != VERSION {
            return Err(FormatError::Version(version));
        }
        let text_len = r.u32()? as usize;
        let text = String::from_utf8(read_exact_vec(r.inner(), text_len)?)
            .map_err(|_| FormatError::Invalid("configuration text is not UTF-8".into()))?;

        let mut run_text = String::new();
        let (mut input_dim, mut label_dim, mut num_params) = (None, None, None);
        let (mut mean, mut scale) = (None, None);
        for line in text.lines() {
            let Some(rest) = line.strip_prefix("checkpoint.") else {
                run_text.push_str(line);
                run_text.push('\n');
                continue;
            };
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| FormatError::Invalid(format!("line {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            let int = || v.parse::<usize>().map_err(|_| FormatError::Invalid(format!("{k}: {v:?}")));
            match k {
                "input_dim" => input_dim = Some(int()?),
                "label_dim" => label_dim = Some(int()?),
                "num_params" => num_params = Some(int()?),
                "standardization_mean" => mean = Some(parse_floats(k, v)?),
                "standardization_scale" => scale = Some(parse_floats(k, v)?),
                _ => return Err(FormatError::Invalid(format!("unknown checkpoint key {k:?}"))),
            }
        }
        let missing = |k: &str| FormatError::Invalid(format!("missing checkpoint.{k}"));
        let input_dim = input_dim.ok_or_else(|| missing("input_dim"))?;
        let label_dim = label_dim.ok_or_else(|| missing("label_dim"))?;
        let num_params = num_params.ok_or_else(|| missing("num_params"))?;
        let standardization = Standardization {
            mean: mean.ok_or_else(|| missing("standardization_mean"))?,
            scale: scale.ok_or_else(|| missing("standardization_scale"))?,
        };
        if standardization.mean.len() != input_dim || standardization.scale.len() != input_dim {
            return Err(FormatError::Invalid("standardization width does not match input_dim".into()));
        }

        let config = RunConfig::parse(&run_text)?;
        let arch = ScoreArch {
            label_dim,
            ..config.arch.for_input(input_dim)
        };
        arch.validate()?;
        if arch.num_params() != num_params {
            return Err(FormatError::Invalid(format!(
                "architecture has {} parameters, file declares {num_params}",
                arch.num_params()
            )));
        }
        let params = r.f64s(num_params)?;
        let iterations = r.u64()?;
        let final_loss = r.f64()?;
        let step = r.u64()?;
        let m = r.f64s(num_params)?;
        let v = r.f64s(num_params)?;
        r.expect_end()?;

        let checkpoint = Checkpoint {
            arch,
            schedule: config.schedule,
            mirror: config.mirror,
            train: config.train,
            standardization,
            params,
            iterations,
            final_loss,
            optimizer: AdamState { step, m, v },
        };
        Ok(Self { config, checkpoint })
    }

    pub fn save(&self, path: &Path) -> Result<(), FormatError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qmirror_core::diffusion::{train, DiffusionSchedule, TrainConfig, TrainingData};
    use qmirror_core::mirror::MirrorConfig;
    use qmirror_core::quantum::{generate_dataset, GeneratorConfig, UnitarySampler};

    fn trained(iterations: u64) -> CheckpointFile {
        let g = GeneratorConfig {
            unitary_sampler: UnitarySampler::Qr,
            ..Default::default()
        };
        let ds = generate_dataset([8, 0, 0], 1, &g, 1).unwrap();
        let data = TrainingData::from_dataset(&ds, MirrorConfig::default()).unwrap();
        let config = RunConfig {
            arch: ArchSettings {
                hidden_dim: 8,
                residual_blocks: 1,
                time_embed_dim: 4,
                norm_groups: 2,
            },
            ..Default::default()
        };
        let cfg = TrainConfig {
            batch_size: 4,
            iterations,
            ..Default::default()
        };
        let ck = train(&data, cfg, DiffusionSchedule::default(), config.arch.for_input(4)).unwrap();
        CheckpointFile::new(&config, ck)
    }

    fn bytes(f: &CheckpointFile) -> Vec<u8> {
        let mut out = Vec::new();
        f.write_to(&mut out).unwrap();
        out
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        for iterations in [0, 5] {
            let f = trained(iterations);
            let b = bytes(&f);
            let back = CheckpointFile::read_from(&mut b.as_slice()).unwrap();
            assert_eq!(bytes(&back), b);
            assert_eq!(back.checkpoint.params, f.checkpoint.params);
            assert_eq!(back.checkpoint.optimizer, f.checkpoint.optimizer);
            assert_eq!(back.checkpoint.iterations, iterations);
            assert_eq!(back.config, f.config);
        }
    }

    #[test]
    fn layout_prefix() {
        let f = trained(2);
        let b = bytes(&f);
        assert_eq!(&b[..4], b"QCK1");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        let len = u32::from_le_bytes(b[8..12].try_into().unwrap()) as usize;
        let text = std::str::from_utf8(&b[12..12 + len]).unwrap();
        assert!(text.contains("train.iterations = 2\n"));
        assert!(text.contains("checkpoint.input_dim = 4\n"));
        let n = f.checkpoint.params.len();
        assert_eq!(b.len(), 12 + len + 8 * (3 * n + 3));
        let iters = &b[12 + len + 8 * n..12 + len + 8 * n + 8];
        assert_eq!(u64::from_le_bytes(iters.try_into().unwrap()), 2);
    }

    #[test]
    fn rejects_truncation_and_tampering() {
        let b = bytes(&trained(1));
        assert!(CheckpointFile::read_from(&mut &b[..b.len() - 8]).is_err());
        let mut bad = b.clone();
        bad.extend_from_slice(&[0; 8]);
        assert!(matches!(CheckpointFile::read_from(&mut bad.as_slice()), Err(FormatError::TrailingBytes)));

        let len = u32::from_le_bytes(b[8..12].try_into().unwrap()) as usize;
        let text = std::str::from_utf8(&b[12..12 + len])
            .unwrap()
            .replace("checkpoint.num_params = ", "checkpoint.num_params = 1");
        let mut bad = b[..8].to_vec();
        bad.extend_from_slice(&(text.len() as u32).to_le_bytes());
        bad.extend_from_slice(text.as_bytes());
        bad.extend_from_slice(&b[12 + len..]);
        assert!(matches!(CheckpointFile::read_from(&mut bad.as_slice()), Err(FormatError::Invalid(_))));
    }
}
