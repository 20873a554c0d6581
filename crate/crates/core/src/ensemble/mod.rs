//! The γ-sparsified measurement ensemble: matrices, sparse signals and noisy
//! observations, all generated from counter-based streams so that every
//! entry is a pure function of `(seed, row, column)`.

pub mod format;
mod matrix;
mod signal;

pub use matrix::{
    rescale_coupled, sample_matrix, sample_matrix_split, ColumnMatrix, Convention, EnsembleSpec,
    Provenance, Rescaled, SparseMeasurementMatrix,
};
pub use signal::{
    make_signal, noise_vector, observe, observe_with_variance, ObservationSet, SignPattern,
    SignalSpec,
};
