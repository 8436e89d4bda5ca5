use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or dimensionally inconsistent input.
    #[error("invalid input: {0}")]
    Input(String),

    /// A solver or experiment configuration that cannot be honoured.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A geometric quantity was requested for a pair with `w_r == w_s`.
    #[error("degenerate class pair ({r}, {s}): w_r - w_s vanishes")]
    DegeneratePair { r: usize, s: usize },

    /// An iterate left the finite reals or an objective blew up.
    #[error("solver diverged at iteration {iteration}: {reason}")]
    Divergence { iteration: usize, reason: String },

    /// Corrupted linear-algebra state (e.g. a Cholesky factorization failed).
    #[error("internal numerical failure: {0}")]
    Numerical(String),

    #[error("data file {path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("document error: {0}")]
    Document(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::input(format!("{what}: non-finite entry at position {i}"))),
        None => Ok(()),
    }
}
