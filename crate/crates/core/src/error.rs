use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value fell outside the domain a model or table covers.
    #[error("{what}: {value} outside valid range [{min}, {max}]")]
    Range {
        what: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid settings: {0}")]
    Settings(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dispersion error: {0}")]
    Dispersion(String),

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("inconsistent loss budget: {0}")]
    Inconsistent(String),

    /// Iterative eigen-solver did not reach tolerance.
    #[error("{message} (relative residual {residual:.3e} after {iterations} iterations)")]
    Numerical {
        message: String,
        residual: f64,
        iterations: usize,
    },

    #[error("fit failed: {message}")]
    Fit {
        message: String,
        best: Option<(f64, f64)>,
    },

    #[error("{}: line {line}: {message}", source_name.display())]
    Parse {
        source_name: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn range(what: impl Into<String>, value: f64, min: f64, max: f64) -> Self {
        Error::Range {
            what: what.into(),
            value,
            min,
            max,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error beneath any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
