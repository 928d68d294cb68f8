//! Structure-preserving generative modeling of quantum mixed states.
//!
//! Density matrices are pushed through the gradient of the negative von
//! Neumann entropy, `X -> I + log X`, into the unconstrained space of
//! Hermitian matrices, flattened to real vectors, and modeled there with a
//! variance-preserving score-based diffusion. Decoding runs the inverse map
//! `Y -> exp(Y - I)` followed by trace normalization, so every generated
//! sample is Hermitian, strictly positive definite and trace one no matter
//! how poor the score model is.
//!
//! The crate is `no_std` (with `alloc`). File formats, configuration and the
//! command line live in the companion `qmirror` crate.
//!
//! Modules:
//!
//! - [`linalg`]: complex matrices, Hermitian eigendecomposition (cyclic
//!   Jacobi), matrix log/exp, tensor products, qubit permutations, partial
//!   transpose and density-matrix validity checks.
//! - [`mirror`]: the entropic mirror map and the Hermitian <-> R^{n^2}
//!   isomorphism.
//! - [`quantum`]: synthetic data: single-qubit states, Haar unitaries (Lie
//!   group Langevin sampler and a Ginibre-QR oracle) and the product /
//!   pairwise / fully entangled state classes.
//! - [`diffusion`]: score network with hand-written backpropagation,
//!   denoising score matching, AdamW training, classifier-free guidance and
//!   reverse-SDE / probability-flow samplers.
//! - [`metrics`]: negativity, 1-D / sliced / max-sliced Wasserstein, exact
//!   assignment W1 and energy MMD.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod diffusion;
pub mod error;
pub mod linalg;
pub(crate) mod math;
pub mod metrics;
pub mod mirror;
pub mod quantum;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64;
