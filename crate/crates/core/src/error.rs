use std::io;

use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Incompatible dimensions between operands.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A computation produced (or was handed) a NaN/Inf where a finite
    /// value is required.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("empty vocabulary: no terms survive stopword/min_df filtering")]
    EmptyVocabulary,
    #[error("no users with held-out positives to evaluate")]
    EmptyReport,
    /// A cache/checkpoint file does not follow its declared format.
    #[error("bad file format: {0}")]
    Format(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
