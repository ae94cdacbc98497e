use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The target value is not bracketed by the inverse-trigamma search interval.
    #[error("value {0} is not bracketed by the search interval")]
    NoBracket(f64),

    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    #[error("polynomial leading coefficient is degenerate (eta_m = {0})")]
    DegenerateLeadingCoefficient(f64),

    #[error("moment of order {order} is undefined for alpha = {alpha}")]
    MomentUndefined { order: f64, alpha: f64 },

    #[error("sample of size {0} is too small (need at least {1})")]
    SampleTooSmall(usize, usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
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
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the filesystem rather than by bad values.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
