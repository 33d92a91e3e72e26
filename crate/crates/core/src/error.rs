use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("covariance violates the uncertainty relation (smallest symplectic eigenvalue {0})")]
    UncertaintyViolation(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("harmonic chain has a zero mode (omega = 0)")]
    ZeroMode,
    #[error("mode {0} is pure; its single-particle energy diverges")]
    PureMode(usize),
    #[error("density-matrix tail bound {tail:e} not reached within the maximum box size")]
    BoxTooSmall { tail: f64 },
    #[error("prefix cannot certify the verdict: {0}")]
    Inconclusive(String),
    #[error("function is not absolutely integrable")]
    NotIntegrable,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    TolExceeded { estimate: f64, tolerance: f64 },
    #[error("root finding failed: {0}")]
    RootFindingFailure(String),
    #[error("majorization conditions disagree: {0}")]
    CrossCheckMismatch(String),
    #[error(
        "regularized margins did not collapse (sup difference {sup_diff:e} between Lambda = {lambda_a} and {lambda_b})"
    )]
    NoCollapse { sup_diff: f64, lambda_a: f64, lambda_b: f64 },
    #[error("channel noise matrix Y is singular but nonzero")]
    SingularY,
    #[error("channel matrix X is singular but nonzero")]
    SingularX,
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("channel is not completely positive (smallest eigenvalue {0:e})")]
    NotCompletelyPositive(f64),
    #[error("negativity gap {gap:e} is within the combined error {error:e}")]
    InsufficientMargin { gap: f64, error: f64 },
    #[error("no constructive witness channel found")]
    NotFound,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;
