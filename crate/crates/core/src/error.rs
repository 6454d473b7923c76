use thiserror::Error;

/// Failure classes surfaced by the library. The CLI maps each class to an
/// exit code, see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed configuration or out-of-range parameter.
    #[error("config error: {0}")]
    Config(String),
    /// A structural assumption on the data (decay of the density, N > 2σ,
    /// positivity floor) does not hold.
    #[error("assumption violated: {0}")]
    Assumption(String),
    /// An input was rejected by an operation precondition.
    #[error("rejected: {0}")]
    Rejected(String),
    /// Iterative procedure failed to converge or lost monotonicity.
    #[error("non-convergence: {0}")]
    NonConvergence(String),
    /// A verification check measured a value past its threshold.
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Rejected(_) | Error::Io(_) => 1,
            Error::Assumption(_) => 2,
            Error::NonConvergence(_) => 3,
            Error::CheckFailed(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn reject<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Rejected(msg.into()))
}
