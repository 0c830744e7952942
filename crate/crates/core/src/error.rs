use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A stochastic function value came back NaN or infinite.
    #[error("non-finite function value")]
    EvaluationFailure,

    /// A variance statistic needs at least two samples.
    #[error("variance needs at least 2 samples, have {0}")]
    InsufficientSample(usize),

    /// The right-hand side of a sampling test (or the initial step ratio)
    /// vanished; the iterate is numerically stationary.
    #[error("numerically stationary: test right-hand side vanished")]
    Stationary,

    #[error("evaluation budget exhausted")]
    BudgetExhausted,

    /// The nonsmooth Hessian is undefined when a residual sits exactly on
    /// a kink of the expected absolute value.
    #[error("Hessian undefined: residual {0} lies on a kink boundary")]
    KinkBoundary(usize),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
