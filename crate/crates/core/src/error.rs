use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (bad ranges, zero counts, schema violations).
    #[error("configuration error: {0}")]
    Config(String),
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed input row in an external file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    /// Request exceeds what an exact method can handle.
    #[error("capability error: {0}")]
    Capability(String),
    /// Caller used an object in an invalid state.
    #[error("caller error: {0}")]
    Caller(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
