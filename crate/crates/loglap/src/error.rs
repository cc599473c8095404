//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by discretization, spectral, and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A mathematical precondition on the inputs was violated
    /// (bad interval, odd grid size, parameter out of range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller asked for something structurally invalid
    /// (mismatched grids, wrong vector length, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// The requested parameters lie in a regime where the continuous
    /// problem has no solution, so the solver refuses to run.
    #[error("regime error: {0}")]
    Regime(String),

    /// An iterative routine exhausted its iteration budget.
    #[error("did not converge: {context} (last residual {last_residual:.3e})")]
    NonConvergence {
        context: String,
        last_residual: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
