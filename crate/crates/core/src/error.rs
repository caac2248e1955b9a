use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A request would allocate more than the configured guard allows.
    #[error("size error: {0}")]
    Size(String),

    /// Two independent numerical routes disagree.
    #[error("numeric inconsistency: {0}")]
    NumericInconsistency(String),

    /// The closed-form bound was requested outside its asymptotic regime.
    #[error("asymptotic regime not reached: {0}")]
    Regime(String),

    /// Malformed configuration input (syntax, types, unknown keys).
    #[error("parse error: {0}")]
    Parse(String),

    /// Well-formed configuration that breaks an invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
