//! Hilbert-Huang analysis: empirical mode decomposition and the analytic
//! signal of each mode.

mod emd;
mod hilbert;
mod spline;

use thiserror::Error;

pub use emd::{emd_decompose, extrema, NEGLIGIBLE_RESIDUE, satisfies_imf_property, zero_crossings, ImfSet, SiftConfig};
pub use hilbert::{hilbert_transform, mean_period, unwrap_phase, valid_range, AnalyticSignal, BOUNDARY_TRIM};
pub use spline::NaturalSpline;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HhtError {
    #[error("series has {len} samples; at least {min} are required")]
    TooShort { len: usize, min: usize },
    #[error("non-finite sample at index {index}")]
    NonFiniteInput { index: usize },
    #[error("series is not oscillatory; instantaneous frequency is undefined")]
    NotOscillatory,
    #[error("valid range is empty")]
    EmptyValidRange,
}
