use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the admissible set of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("shape mismatch: expected {expected}, got {got} ({what})")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Initial data incompatible with the monotone graphs.
    #[error("compatibility error: {0}")]
    Compatibility(String),

    #[error("step {step} failed after {iterations} iterations (residual {residual:.3e})")]
    StepFailed {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("parse error in {source_name} at line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(what: &'static str, expected: usize, got: usize) -> Self {
        Error::Shape {
            what,
            expected,
            got,
        }
    }
}
