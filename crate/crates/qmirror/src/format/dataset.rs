//! `QSD1` dataset files.
//!
//! Little-endian layout:
//!
//! ```text
//! magic "QSD1" | u32 version = 1 | u32 n | u32 L | u64 count | u64 seed | u8 isometric_scaling
//! count x ( L x f64 label weight | n*n x (f64 re, f64 im), row-major )
//! u32 byte length | resolved configuration, UTF-8
//! ```
//!
//! Matrices are stored in full. Readers reject any matrix whose hermiticity
//! defect exceeds [`HERMITICITY_TOLERANCE`]. `L` is 0 for unlabelled records
//! and the class count otherwise.

use std::io::{Read, Write};
use std::path::Path;

use qmirror_core::linalg::{ComplexMatrix, DensityMatrix, HermitianMatrix};
use qmirror_core::quantum::{ClassLabel, StateDataset, NUM_CLASSES};
use qmirror_core::Complex64;

use super::{read_exact_vec, Reader, FormatError};
use crate::config::RunConfig;

pub const MAGIC: &[u8; 4] = b"QSD1";
pub const VERSION: u32 = 1;
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;

/// Contents of a `QSD1` file.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetFile {
    /// Matrix side length.
    pub dim: usize,
    /// One label per record, or none at all.
    pub labels: Option<Vec<ClassLabel>>,
    pub matrices: Vec<HermitianMatrix>,
    pub seed: u64,
    pub isometric_scaling: bool,
    /// Resolved configuration text of the run that wrote the file.
    pub config_text: String,
}

impl DatasetFile {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn label(&self, i: usize) -> Option<ClassLabel> {
        self.labels.as_ref().map(|l| l[i])
    }

    pub fn from_state_dataset(ds: &StateDataset, config: &RunConfig) -> Self {
        Self {
            dim: ds.dim(),
            labels: Some(ds.records.iter().map(|(l, _)| *l).collect()),
            matrices: ds.records.iter().map(|(_, m)| m.as_hermitian().clone()).collect(),
            seed: ds.seed,
            isometric_scaling: ds.isometric_scaling,
            config_text: config.render(),
        }
    }

    /// Reinterprets the records as states; fails on the first matrix that is
    /// not a positive definite unit-trace matrix, or when unlabelled.
    pub fn to_state_dataset(&self) -> Result<StateDataset, FormatError> {
        let labels = self.labels.as_ref().ok_or(FormatError::Unlabelled)?;
        let qubits = self.dim.trailing_zeros() as usize;
        if 1usize << qubits != self.dim {
            return Err(FormatError::Core(qmirror_core::Error::NotPowerOfTwo(self.dim)));
        }
        let config = RunConfig::parse(&self.config_text)?;
        let records = labels
            .iter()
            .zip(&self.matrices)
            .map(|(l, m)| Ok((*l, DensityMatrix::try_from_matrix(m.as_matrix(), HERMITICITY_TOLERANCE)?)))
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(StateDataset {
            qubits,
            records,
            seed: self.seed,
            generator_config: config.data.generator,
            isometric_scaling: self.isometric_scaling,
        })
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<(), FormatError> {
        let label_len = if self.labels.is_some() { NUM_CLASSES } else { 0 };
        if let Some(l) = &self.labels {
            if l.len() != self.matrices.len() {
                return Err(FormatError::Invalid(format!(
                    "{} labels for {} matrices",
                    l.len(),
                    self.matrices.len()
                )));
            }
        }
        let mut buf = Vec::with_capacity(37 + self.len() * (8 * label_len + 16 * self.dim * self.dim));
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.dim as u32).to_le_bytes());
        buf.extend_from_slice(&(label_len as u32).to_le_bytes());
        buf.extend_from_slice(&(self.len() as u64).to_le_bytes());
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.push(u8::from(self.isometric_scaling));
        for (i, m) in self.matrices.iter().enumerate() {
            if m.dim() != self.dim {
                return Err(FormatError::Invalid(format!("record {i} has dimension {}", m.dim())));
            }
            if let Some(l) = &self.labels {
                for w in l[i].weights() {
                    buf.extend_from_slice(&w.to_le_bytes());
                }
            }
            for z in m.as_matrix().as_slice() {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        buf.extend_from_slice(&(self.config_text.len() as u32).to_le_bytes());
        buf.extend_from_slice(self.config_text.as_bytes());
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
        let dim = r.u32()? as usize;
        let label_len = r.u32()? as usize;
        let count = r.u64()? as usize;
        let seed = r.u64()?;
        let isometric_scaling = match r.u8()? {
            0 => false,
            1 => true,
            b => return Err(FormatError::Invalid(format!("isometric_scaling flag {b}"))),
        };
        if label_len != 0 && label_len != NUM_CLASSES {
            return Err(FormatError::Invalid(format!("label length {label_len}")));
        }
        let mut labels = (label_len > 0).then(Vec::new);
        let mut matrices = Vec::new();
        for i in 0..count {
            if let Some(ls) = labels.as_mut() {
                let w = r.f64s(label_len)?;
                ls.push(ClassLabel::from_slice(&w)?);
            }
            let raw = r.f64s(2 * dim * dim)?;
            let data = raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
            let m = ComplexMatrix::from_vec(dim, data)?;
            let defect = m.hermiticity_defect();
            if !(defect <= HERMITICITY_TOLERANCE) {
                return Err(FormatError::NotHermitian { record: i, defect });
            }
            matrices.push(HermitianMatrix::hermitian_part(&m));
        }
        let text_len = r.u32()? as usize;
        let config_text = String::from_utf8(read_exact_vec(r.inner(), text_len)?)
            .map_err(|_| FormatError::Invalid("configuration text is not UTF-8".into()))?;
        r.expect_end()?;
        Ok(Self {
            dim,
            labels,
            matrices,
            seed,
            isometric_scaling,
            config_text,
        })
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
