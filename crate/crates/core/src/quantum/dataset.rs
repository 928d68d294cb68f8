//! Labelled datasets of the three entanglement classes.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::random::random_density_baseline;
use super::states::{fully_state, pairwise_state, product_state, GeneratorConfig};
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::rng;

/// Number of classes in a label.
pub const NUM_CLASSES: usize = 3;

/// The three generated classes, in label order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateClass {
    Product,
    Pairwise,
    Fully,
}

impl StateClass {
    pub const ALL: [StateClass; NUM_CLASSES] = [StateClass::Product, StateClass::Pairwise, StateClass::Fully];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            StateClass::Product => "product",
            StateClass::Pairwise => "pairwise",
            StateClass::Fully => "full",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Class weights: a convex combination of the one-hot class labels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassLabel {
    weights: [f64; NUM_CLASSES],
}

/// Allowed deviation of the weight sum from one.
pub const LABEL_SUM_TOLERANCE: f64 = 1e-9;

impl ClassLabel {
    pub fn new(weights: [f64; NUM_CLASSES]) -> Result<Self> {
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidLabel(format!("weights {weights:?} outside [0, 1]")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > LABEL_SUM_TOLERANCE {
            return Err(Error::InvalidLabel(format!("weights {weights:?} sum to {sum}")));
        }
        Ok(Self { weights })
    }

    pub fn from_slice(weights: &[f64]) -> Result<Self> {
        let arr: [f64; NUM_CLASSES] = weights
            .try_into()
            .map_err(|_| Error::InvalidLabel(format!("expected {NUM_CLASSES} weights, got {}", weights.len())))?;
        Self::new(arr)
    }

    pub fn one_hot(class: StateClass) -> Self {
        let mut weights = [0.0; NUM_CLASSES];
        weights[class.index()] = 1.0;
        Self { weights }
    }

    /// Equal weight on every class.
    pub fn uniform() -> Self {
        Self {
            weights: [1.0 / NUM_CLASSES as f64; NUM_CLASSES],
        }
    }

    pub fn weights(&self) -> &[f64; NUM_CLASSES] {
        &self.weights
    }

    /// The class when the label is one-hot.
    pub fn class(&self) -> Option<StateClass> {
        StateClass::ALL.into_iter().find(|c| self.weights[c.index()] == 1.0)
    }
}

/// Labelled density matrices with generation metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct StateDataset {
    pub qubits: usize,
    pub records: Vec<(ClassLabel, DensityMatrix)>,
    pub seed: u64,
    pub generator_config: GeneratorConfig,
    pub isometric_scaling: bool,
}

impl StateDataset {
    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Matrices whose label is one-hot on `class`.
    pub fn class_states(&self, class: StateClass) -> Vec<&DensityMatrix> {
        self.records
            .iter()
            .filter(|(l, _)| l.class() == Some(class))
            .map(|(_, m)| m)
            .collect()
    }
}

/// One record of class `class`.
pub fn generate_state<R: Rng + ?Sized>(
    class: StateClass,
    qubits: usize,
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<DensityMatrix> {
    match class {
        StateClass::Product => product_state(qubits, &cfg.qubit, rng),
        StateClass::Pairwise => pairwise_state(qubits, cfg, rng),
        StateClass::Fully => fully_state(qubits, cfg, rng),
    }
}

/// Generates `counts[c]` records per class and shuffles them.
///
/// Record `r` (counted in class order before shuffling) draws from stream
/// `r + 1` of `seed`; the Fisher-Yates shuffle uses stream 0. Output is a
/// pure function of the arguments.
pub fn generate_dataset(
    counts: [usize; NUM_CLASSES],
    qubits: usize,
    cfg: &GeneratorConfig,
    seed: u64,
) -> Result<StateDataset> {
    cfg.validate()?;
    if qubits == 0 {
        return Err(Error::InvalidConfig("qubit count must be positive".into()));
    }
    let total: usize = counts.iter().sum();
    let mut records = Vec::with_capacity(total);
    let mut r = 0u64;
    for class in StateClass::ALL {
        for _ in 0..counts[class.index()] {
            let mut stream = rng::stream(seed, r + 1);
            records.push((ClassLabel::one_hot(class), generate_state(class, qubits, cfg, &mut stream)?));
            r += 1;
        }
    }
    shuffle(&mut records, &mut rng::stream(seed, 0));
    Ok(StateDataset {
        qubits,
        records,
        seed,
        generator_config: *cfg,
        isometric_scaling: true,
    })
}

/// `count` random-matrix baseline states labelled uniformly over the classes.
pub fn generate_baseline_dataset(count: usize, qubits: usize, seed: u64) -> Result<StateDataset> {
    if qubits == 0 {
        return Err(Error::InvalidConfig("qubit count must be positive".into()));
    }
    let dim = 1usize << qubits;
    let records = (0..count as u64)
        .map(|r| {
            let mut stream = rng::stream(seed, r + 1);
            (ClassLabel::uniform(), random_density_baseline(dim, &mut stream))
        })
        .collect();
    Ok(StateDataset {
        qubits,
        records,
        seed,
        generator_config: GeneratorConfig::default(),
        isometric_scaling: true,
    })
}

/// In-place Fisher-Yates shuffle.
pub fn shuffle<T, R: Rng + ?Sized>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}
