use thiserror::Error;

/// Errors surfaced by the simulation and analysis primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Requested projection has (numerically) zero success probability.
    #[error("impossible projection: outcome has zero probability")]
    ImpossibleProjection,

    /// A required measurement configuration was not supplied.
    #[error("missing configuration: {0}")]
    MissingConfiguration(String),

    /// A noise fit or coherence substitution would require a negative weight.
    #[error("infeasible noise model: {0}")]
    InfeasibleModel(String),

    /// A computed quantity broke an internal invariant (a bug, not bad input).
    #[error("internal invariant breach: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
