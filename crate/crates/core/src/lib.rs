//! Signed-support recovery by the Lasso from γ-sparsified random measurements.
//!
//! - [`ensemble`]: sparse measurement matrices, signals and noisy observations
//! - [`lasso`]: coordinate-descent Lasso solver with KKT certification
//! - [`witness`]: the primal-dual witness construction and its events
//! - [`theory`]: scalar thresholds, schedules and tail bounds
//! - [`sweep`]: reproducible Monte Carlo phase-transition experiments

pub mod ensemble;
pub mod error;
pub mod lasso;
pub mod linalg;
pub mod par;
pub mod rng;
pub mod sweep;
pub mod theory;
pub mod witness;

pub use error::{Error, Result};
pub use par::Execution;
