use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A forward normalizer vanished: the observed groups have zero
    /// probability under the current parameters. `t` is 0-based.
    #[error("data impossible under the current parameters at time index {t}")]
    ImpossibleData { t: usize },

    #[error("non-finite objective while updating {param}")]
    NumericalFailure { param: String },

    #[error("undefined input: {0}")]
    UndefinedInput(String),

    #[error("{failures} of {replicates} bootstrap replicate fits failed")]
    TooManyFailures { failures: usize, replicates: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
