use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("contour hits the singular set of the logarithm at {0}")]
    SingularContour(String),

    #[error(
        "quadrature did not converge: imaginary residual {imag_residual:.3e}; \
         try truncation {suggested_truncation} with {suggested_nodes} nodes"
    )]
    NotConverged {
        imag_residual: f64,
        suggested_truncation: f64,
        suggested_nodes: usize,
    },

    #[error("factorization breakdown: {0}")]
    FactorizationBreakdown(String),

    #[error("degenerate estimate: all {0} samples are exactly zero")]
    DegenerateEstimate(usize),

    #[error("denominator F2({lambda}) is consistent with zero (relative error {rel_error:.3})")]
    UnresolvedDenominator { lambda: f64, rel_error: f64 },

    #[error("eigen-solver failure: {0}")]
    EigenSolver(String),

    #[error("generator count mismatch: {0} vs {1}")]
    GeneratorMismatch(usize, usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate eigenvalues: {0}; use the symmetrized-domain variant")]
    DegenerateEigenvalues(String),

    #[error("root not bracketed: {0}")]
    NoRoot(String),

    #[error("Newton polish failed: residual {residual:.3e} after {iterations} steps")]
    NewtonFailed { residual: f64, iterations: usize },

    #[error("argument {0} outside the supported range")]
    OutOfRange(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
