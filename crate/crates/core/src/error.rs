use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("stale forward trace: {0}")]
    Trace(String),

    #[error("invalid layer sizes: {0}")]
    Shape(String),

    #[error("non-finite value while evaluating {what} (constraint index {index:?})")]
    Evaluation { what: String, index: Option<usize> },

    #[error("unknown problem '{name}' (known problems: {known})")]
    Registry { name: String, known: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("training diverged at epoch {epoch}, sample {sample}: {reason}")]
    Diverged {
        epoch: usize,
        sample: usize,
        reason: String,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported model version: {0}")]
    Version(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("oracle failed: {0}")]
    OracleFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
