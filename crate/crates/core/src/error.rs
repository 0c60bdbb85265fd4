use thiserror::Error;

/// Errors reported by the library.
///
/// Non-convergence of an iterative solver is not an error: solvers return
/// their best iterate with a `converged` flag instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid curve specification: {0}")]
    CurveSpec(String),

    #[error("singular kernel evaluation: {0}")]
    Singularity(String),

    #[error("duplicate nodes {i} and {j}")]
    DuplicateNodes { i: usize, j: usize },

    #[error("degenerate least-squares fit: {0}")]
    DegenerateFit(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
