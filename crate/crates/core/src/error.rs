use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or lengths that do not conform for an operation.
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    /// Input outside the mathematical domain of an operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// An operation produced NaN or infinity.
    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },

    /// Training produced a non-finite loss.
    #[error("non-finite loss at step {step}: {detail}")]
    Diverged { step: usize, detail: String },

    /// Any other violated precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Attempt to update a frozen parameter group.
    #[error("parameter group `{0}` is frozen")]
    Frozen(String),

    /// Invalid or missing configuration value.
    #[error("config error for `{key}`: {detail}")]
    Config { key: String, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
