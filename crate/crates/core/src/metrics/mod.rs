//! Physical and distributional evaluation of generated states.
//!
//! Point clouds are flat row-major `&[f64]` slices with an explicit row
//! width. Randomized metrics draw their directions from per-index streams of
//! a seed, so results do not depend on evaluation order.

mod assignment;
mod mmd;
mod negativity;
mod report;
mod wasserstein;

pub use assignment::{exact_w1, min_cost_assignment};
pub use mmd::{energy_mmd, MmdEstimate, MmdEstimator};
pub use negativity::{negativity, negativity_hermitian};
pub use report::{
    dataset_observables, full_report, observables, report_matrices, spectrum_w1, EvalConfig, EvalReport,
    Observables, W1_CAVEAT,
};
pub use wasserstein::{max_sliced_wasserstein, projected_w1, sliced_wasserstein, w1_1d, MswdConfig};
