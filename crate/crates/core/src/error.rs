use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter set violates one of its invariants.
    #[error("invalid {what}: {reason}")]
    InvalidSpec { what: &'static str, reason: String },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario document could not be turned into a valid scenario.
    /// `path` is the dotted key path of the offending entry, when known.
    #[error("{}{message}", path.as_deref().map(|p| format!("{p}: ")).unwrap_or_default())]
    Config {
        path: Option<String>,
        message: String,
    },

    #[error("cannot parse pack configuration {input:?}: {reason}")]
    PackName { input: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(reason: impl Into<String>) -> Self {
        Error::Domain(reason.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: Some(path.into()),
            message: message.into(),
        }
    }
}
