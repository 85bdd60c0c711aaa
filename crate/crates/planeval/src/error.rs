use std::path::PathBuf;

use crate::client::ChatError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] planeval_core::Error),
    #[error(transparent)]
    Chat(#[from] ChatError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("unsupported record schema version {0}")]
    SchemaVersion(u32),
    #[error("records mix roles {0} and {1}")]
    MixedRoles(String, String),
    #[error("no records to report")]
    EmptyInput,
    #[error("template {template} leaves placeholder {{{{{name}}}}} unbound")]
    UnboundPlaceholder { template: String, name: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}
