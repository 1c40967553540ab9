use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("point does not belong to the model's sample space: {0}")]
    PointMismatch(String),
    #[error("weight not integrable: {0}")]
    NonIntegrableWeight(String),
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("state space too large for exact enumeration ({states:.3e} > {limit:.0e}); use the Monte Carlo estimator")]
    StateSpace { states: f64, limit: f64 },
    #[error("rate function is infinite at r = {0}")]
    RateInfinite(f64),
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
}

impl Error {
    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature { .. } | Error::NonConvergence(_))
    }
}
