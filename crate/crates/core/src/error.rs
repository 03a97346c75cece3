use std::path::PathBuf;

/// Errors produced by the toolkit.
///
/// Variants are grouped so that front ends can map them onto coarse
/// categories (usage, data, extractor weights) without string matching.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A profile document failed validation; `field` is the dotted path.
    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    /// Malformed extractor weight file.
    #[error("extractor format error: {0}")]
    Format(String),

    #[error("failed to decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("failed to encode image: {0}")]
    Encode(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("not found: {0}")]
    NotFound(PathBuf),

    #[error("empty dataset: {0}")]
    EmptyDataset(PathBuf),

    /// Batch augmentation stopped early; some outputs were already written.
    #[error("augmentation aborted after {written} images: {source}")]
    Partial {
        written: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
