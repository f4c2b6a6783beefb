//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The panel quadrature ran out of panels before the tail bound and the
    /// last panel contribution both dropped below the requested tolerance.
    #[error(
        "quadrature did not converge after {panels} panels \
         (partial sum {partial:.12e}, error estimate {estimate:.3e})"
    )]
    QuadratureNonConvergence {
        panels: usize,
        partial: f64,
        estimate: f64,
    },

    /// Newton iteration on the Bethe equations stalled or hit the iteration
    /// cap. Carries the last iterate so callers can inspect or restart it.
    #[error(
        "Bethe solver did not converge after {iterations} iterations \
         (residual {residual:.3e})"
    )]
    SolverNonConvergence {
        iterations: usize,
        residual: f64,
        last_charge: Vec<f64>,
        last_spin: Vec<f64>,
    },

    /// The Newton step could not be computed; a continuation start from a
    /// larger coupling usually fixes this.
    #[error("Jacobian singular to working precision; retry with continuation from a larger coupling")]
    SingularJacobian,

    /// Ground state degenerate within the resolution threshold, so the
    /// single-site populations are not well defined.
    #[error("degenerate ground state (gap {gap:.3e}); populations are ill-defined")]
    DegenerateGroundState { gap: f64 },

    /// Requested sector is too large for dense exact diagonalization.
    #[error("sector ({sites} sites, dimension {dimension}) exceeds exact-diagonalization capacity")]
    EdCapacity { sites: usize, dimension: usize },

    /// Dense symmetric eigensolver failed to converge.
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
