use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: invalid UTF-8 at byte offset {offset}", path.display())]
    Utf8 { path: PathBuf, offset: usize },

    #[error("{}: line {line}: empty line", path.display())]
    EmptyLine { path: PathBuf, line: usize },

    #[error("{}: line {line}: token {token:?} contains whitespace", path.display())]
    BadToken {
        path: PathBuf,
        line: usize,
        token: String,
    },

    #[error("pool manifest {}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },

    #[error(
        "system {system:?}: {} has {found} lines but target {} has {expected}",
        file.display(),
        target.display()
    )]
    Misaligned {
        system: String,
        file: PathBuf,
        target: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("duplicate system name {0:?}")]
    DuplicateSystem(String),

    #[error("unknown system {0:?}")]
    UnknownSystem(String),

    #[error("{0}")]
    EmptyInput(&'static str),

    #[error("reference sentence {0} is empty")]
    EmptyReference(usize),

    #[error("hypothesis and reference differ in length ({hyp} vs {reference} sentences)")]
    LengthMismatch { hyp: usize, reference: usize },

    #[error("MTLD threshold must lie in (0, 1), got {0}")]
    Threshold(f64),

    #[error("system {system:?}: {reason}")]
    Factor { system: String, reason: String },

    #[error("corpus {0:?} has no sentences")]
    EmptyCorpus(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: line {line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl Error {
    /// Whether the error stems from the caller's settings rather than from
    /// the data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Threshold(_))
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
