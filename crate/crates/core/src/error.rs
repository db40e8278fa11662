use alloc::string::String;

/// Errors raised by the pricing engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside the supported range.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A cumulant generating function was evaluated outside its domain.
    #[error("cgf argument {theta} outside domain: must be below {bound}")]
    Domain {
        /// Requested argument.
        theta: f64,
        /// Supremum of the domain of finiteness.
        bound: f64,
    },
    /// A law has zero variance where a positive one is required.
    #[error("degenerate law: {0}")]
    DegenerateLaw(String),
    /// A formula would divide by zero for this configuration.
    #[error("singular configuration: {0}")]
    Singular(String),
    /// Model parameters violate an invariant.
    #[error("invalid parameters: {0}")]
    Params(String),
    /// A numerical procedure did not reach its tolerance.
    #[error("numerical failure: {message} (best value {value}, error estimate {achieved:e})")]
    Numerical {
        /// What failed.
        message: String,
        /// Best available value.
        value: f64,
        /// Achieved error estimate.
        achieved: f64,
    },
    /// The constraint matrix `[mu 1]` does not have full column rank.
    #[error("constraint matrix [mu 1] is rank deficient")]
    RankDeficient,
    /// The target return cannot be met by unit-norm, fully-invested weights.
    #[error("target return {k} is not attainable; attainable interval is [{lo}, {hi}]")]
    InfeasibleTarget {
        /// Requested target.
        k: f64,
        /// Lower end of the attainable interval (NaN when empty).
        lo: f64,
        /// Upper end of the attainable interval (NaN when empty).
        hi: f64,
    },
    /// Market data is unusable.
    #[error("invalid market data: {0}")]
    Data(String),
    /// Parameter estimation failed.
    #[error("estimation failed: {0}")]
    Estimation(String),
}

/// Crate result alias.
pub type Result<T> = core::result::Result<T, Error>;
