use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed graph document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unsupported graph: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("profile does not match graph: {0}")]
    ProfileMismatch(String),

    #[error("inconsistent strategy at node {node}: {detail}")]
    InconsistentStrategy { node: String, detail: String },

    #[error("singular system while solving for node values (pivot column {column}); {detail}")]
    Singular { column: usize, detail: String },

    #[error("power iteration did not converge after {iterations} iterations (eigenvalue change {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("exact arithmetic is not available for {0}")]
    ExactUnsupported(&'static str),

    #[error("oracle construction failed: {0}")]
    Oracle(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
