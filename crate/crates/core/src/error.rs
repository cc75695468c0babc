//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    /// An input violated a documented precondition (non-positive frequency,
    /// empty point set, mismatched lengths, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The spectrum acquired an imaginary part beyond tolerance. Reachable
    /// when the diamagnetic term is disabled and the coupling is large, or
    /// with otherwise invalid parameters.
    #[error("instability: {0}")]
    Instability(String),

    /// A numerical routine failed its own verification (root bracketing,
    /// eigenvector residual, non-convergent iteration).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A value handed in by the caller fails an invariant it was required
    /// to satisfy (e.g. an unnormalized polariton mode).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed row or header in a CSV/TOML input; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Fewer data points than free parameters.
    #[error("under-determined fit: {points} point(s) for {params} free parameter(s)")]
    UnderDetermined { points: usize, params: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
