use thiserror::Error;

/// Errors produced by the simulator and the bound evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A distance ratio was infinite (point coincides with a FAP).
    #[error("distance ratio is infinite: point coincides with the FAP")]
    InfiniteRatio,

    /// A distance ratio exceeded the top of the partition grid.
    #[error("ratio {delta} exceeds 1/kappa_0 = {limit}")]
    OutOfRange { delta: f64, limit: f64 },

    /// The requested region or parameter combination has no mass.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// A Monte Carlo estimator saw no trial satisfying its conditioning event.
    #[error("no conditioned trials after {trials_total} attempts")]
    InsufficientConditioning { trials_total: u64 },

    /// An exponent grew past the range of f64.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A required element (e.g. the tagged FAP) is missing.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(op: &'static str, reason: impl Into<String>) -> Result<T> {
    Err(Error::Domain {
        op,
        reason: reason.into(),
    })
}
