//! Numerical kernels: dense complex linear algebra, the zeroth-order Hankel
//! function of the first kind, a two-dimensional Newton solver and
//! double-double arithmetic.

mod bessel;
pub mod dd;
mod linalg;
mod newton;

pub use bessel::{bessel_j0, bessel_y0, hankel0_first_kind};
pub use linalg::{solve_complex_linear, ComplexMatrix, ComplexVector};
pub use newton::{newton2d, NewtonRoot};

use thiserror::Error;

/// Failures raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e}")]
    Singular { pivot: f64, threshold: f64 },
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("no convergence after {iterations} iterations (best point {best:?}, residual {residual:e})")]
    NonConvergence {
        best: [f64; 2],
        residual: f64,
        iterations: usize,
    },
}
