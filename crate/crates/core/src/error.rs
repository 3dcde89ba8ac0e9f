use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("undefined conditional: {0}")]
    UndefinedConditional(String),
    #[error("layout error: {0}")]
    Layout(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
