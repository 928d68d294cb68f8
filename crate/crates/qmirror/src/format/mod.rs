//! Binary artifact formats: `QSD1` datasets and `QCK1` checkpoints.

pub mod checkpoint;
pub mod dataset;

use std::io::Read;

pub use checkpoint::CheckpointFile;
pub use dataset::DatasetFile;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes")]
    Magic,
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("record {record} is not Hermitian (defect {defect:e})")]
    NotHermitian { record: usize, defect: f64 },
    #[error("dataset has no labels")]
    Unlabelled,
    #[error("unexpected bytes after the end of the file")]
    TrailingBytes,
    #[error("malformed file: {0}")]
    Invalid(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] qmirror_core::Error),
}

/// Reads exactly `len` bytes without trusting `len` for the allocation.
pub(crate) fn read_exact_vec(r: &mut impl Read, len: usize) -> std::io::Result<Vec<u8>> {
    let mut out = Vec::new();
    r.take(len as u64).read_to_end(&mut out)?;
    if out.len() != len {
        return Err(std::io::ErrorKind::UnexpectedEof.into());
    }
    Ok(out)
}

/// Little-endian primitive reader.
pub(crate) struct Reader<'a, R: Read> {
    r: &'a mut R,
}

impl<'a, R: Read> Reader<'a, R> {
    pub fn new(r: &'a mut R) -> Self {
        Self { r }
    }

    pub fn inner(&mut self) -> &mut R {
        self.r
    }

    fn array<const N: usize>(&mut self) -> std::io::Result<[u8; N]> {
        let mut b = [0u8; N];
        self.r.read_exact(&mut b)?;
        Ok(b)
    }

    pub fn magic(&mut self, expected: &[u8; 4]) -> Result<(), FormatError> {
        if &self.array::<4>()? != expected {
            return Err(FormatError::Magic);
        }
        Ok(())
    }

    pub fn u8(&mut self) -> std::io::Result<u8> {
        Ok(self.array::<1>()?[0])
    }

    pub fn u32(&mut self) -> std::io::Result<u32> {
        self.array().map(u32::from_le_bytes)
    }

    pub fn u64(&mut self) -> std::io::Result<u64> {
        self.array().map(u64::from_le_bytes)
    }

    pub fn f64(&mut self) -> std::io::Result<f64> {
        self.array().map(f64::from_le_bytes)
    }

    pub fn f64s(&mut self, n: usize) -> std::io::Result<Vec<f64>> {
        let bytes = read_exact_vec(self.r, n * 8)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }

    pub fn expect_end(&mut self) -> Result<(), FormatError> {
        let mut b = [0u8; 1];
        match self.r.read(&mut b)? {
            0 => Ok(()),
            _ => Err(FormatError::TrailingBytes),
        }
    }
}
