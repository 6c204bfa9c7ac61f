use thiserror::Error;

/// Errors reported by the numerical kernels, solvers and file helpers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data is unusable (non-finite samples, expansions that are too shallow, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A mathematical hypothesis of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Evaluation at a singular point of a kernel.
    #[error("pole: {0}")]
    Pole(String),

    /// The truncated linear system could not be solved.
    #[error("solver error: {message} (pivot ratio {pivot_ratio:.3e})")]
    Solver { message: String, pivot_ratio: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
