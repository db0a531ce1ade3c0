use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The integrator drifted off the unit-trace pure-state manifold.
    #[error("integration failure: trace/purity drift {drift:.3e} exceeds {limit:.1e}")]
    Integration { drift: f64, limit: f64 },

    /// A sweep cell failed; carries the cell's parameters.
    #[error("sweep cell (detuning {detuning} meV, ratio {ratio}) failed: {source}")]
    Cell {
        detuning: f64,
        ratio: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {what}: {message}")]
    Parse { what: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse { what: what.into(), message: message.to_string() }
    }

    /// True for failures of the numerics rather than of the inputs or the filesystem.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Integration { .. } => true,
            Error::Cell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
