use std::path::PathBuf;

use thiserror::Error;

use crate::numerics::NumericsError;

/// Errors raised by the modelling, forward, inverse and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Green function evaluated at its singularity x = 0")]
    Singularity,

    #[error("direction off the energy shell: |l| = {norm}, kappa = {kappa}")]
    OffShell { norm: f64, kappa: f64 },

    #[error("interaction matrix is singular at this energy")]
    SingularInteraction,

    #[error("degenerate ray: {0}")]
    DegenerateRay(String),

    #[error("terms are not separable: {0}")]
    IllSeparated(String),

    #[error("strengths undetermined for scatterers {0:?}: no probe gave a nonzero charge")]
    UndeterminedStrength(Vec<usize>),

    #[error("no zero of the total field found in the search region")]
    NoZeroFound,

    #[error("point is not a zero of the total field: |psi| = {residual:e}")]
    NotAZero { residual: f64 },

    #[error("point coincides with scatterer {index}")]
    CoincidesWithScatterer { index: usize },

    #[error("verification failed: {what} = {value:e} exceeds {bound:e}")]
    VerificationFailed { what: String, value: f64, bound: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
