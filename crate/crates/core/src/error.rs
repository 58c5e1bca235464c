use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("line {line}: field `{field}`: {message}")]
    Schema {
        line: usize,
        field: String,
        message: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("frame {frame}: joint {joint} is invalid")]
    InvalidJoint { frame: usize, joint: usize },

    #[error("symbol {symbol} out of range for {levels} levels")]
    SymbolRange { symbol: usize, levels: usize },

    #[error("split cannot be satisfied for classes {classes:?}: {message}")]
    Split { classes: Vec<u32>, message: String },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("model file: {0}")]
    ModelFile(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }
}
