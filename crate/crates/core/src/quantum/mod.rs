//! Synthetic multi-qubit states: the single-qubit distribution, Haar
//! unitaries, the three entanglement classes and labelled datasets.

mod dataset;
mod haar;
mod random;
mod states;

pub use dataset::{
    generate_baseline_dataset, generate_dataset, generate_state, shuffle, ClassLabel, StateClass, StateDataset,
    LABEL_SUM_TOLERANCE, NUM_CLASSES,
};
pub use haar::{
    haar_unitaries_lie, haar_unitary_lie, haar_unitary_qr, lie_algebra_basis, LieChain, LieSamplerConfig,
    UnitaryMatrix, UNITARITY_TOLERANCE,
};
pub use random::{random_density, random_density_baseline, random_hermitian};
pub use states::{
    all_pairs, build_entangler, entangle, fully_state, pairwise_pairs, pairwise_state, product_state,
    sample_qubit, GeneratorConfig, QubitDistConfig, UnitarySampler,
};
