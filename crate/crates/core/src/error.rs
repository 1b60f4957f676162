use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("channel has no pixels")]
    EmptyChannel,
    #[error("histogram total is zero")]
    ZeroTotal,
    #[error("empty input sequence")]
    EmptySequence,
    #[error("target pool is empty")]
    EmptyPool,
    #[error("method `{0}` requires a target pool but none was provided")]
    MissingPool(String),
    #[error("record `{0}` belongs to the target domain; only source records can be augmented")]
    TargetRecord(String),
    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("unsupported format in {}: {reason}", path.display())]
    UnsupportedFormat { path: PathBuf, reason: String },
    #[error("parse error in {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("manifest has no records")]
    EmptyManifest,
    #[error("dimension mismatch{}: expected {expected:?}, got {actual:?}", id.as_deref().map(|i| format!(" for `{i}`")).unwrap_or_default())]
    DimensionMismatch {
        id: Option<String>,
        expected: (u32, u32),
        actual: (u32, u32),
    },
    #[error("invalid shape: {0}")]
    Shape(String),
    #[error("non-finite value: {0}")]
    NonFinite(f64),
    #[error("{context}: {source}")]
    Record {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image codec error on {}: {source}", path.display())]
    Codec {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("report serialization failed: {0}")]
    Report(String),
}

impl Error {
    /// Wraps an error with the identifier of the record that produced it.
    pub fn for_record(id: &str, err: Error) -> Error {
        Error::Record {
            context: format!("record `{id}`"),
            source: Box::new(err),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
