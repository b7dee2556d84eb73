use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad subsystem index {index} for {n_factors} factors")]
    BadIndex { index: usize, n_factors: usize },

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("fidelity target is singular (condition number {0:.3e})")]
    SingularTarget(f64),

    #[error("recovery prior is singular: {0}")]
    SingularPrior(String),

    #[error("central element has a degenerate spectrum (gap {0:.3e})")]
    CenterDegenerate(f64),

    #[error("support of the average state is ill-conditioned (condition number {0:.3e})")]
    RankCollapse(f64),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("channel is not covariant (witness {0:.3e})")]
    NotCovariant(f64),

    #[error("assertion failed: {0}")]
    AssertionFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
