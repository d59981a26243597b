use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// A malformed value inside one line of an input file.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message}")]
pub struct FormatError {
    pub message: String,
}

impl FormatError {
    pub fn new(message: impl Into<String>) -> Self {
        FormatError { message: message.into() }
    }
}

/// An identifier that does not name anything loaded.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LookupError {
    #[error("unknown lexical category `{0}`")]
    Category(String),
    #[error("unknown concept or instance `{0}`")]
    Concept(String),
    #[error("no word at position {0}")]
    Position(usize),
}

/// Failure to read or validate a document, taxonomy or category file.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl LoadError {
    pub(crate) fn parse(path: &std::path::Path, line: usize, message: impl Into<String>) -> Self {
        LoadError::Parse { path: path.to_path_buf(), line, message: message.into() }
    }

    pub(crate) fn invalid(path: &std::path::Path, message: impl Into<String>) -> Self {
        LoadError::Invalid { path: path.to_path_buf(), message: message.into() }
    }
}
