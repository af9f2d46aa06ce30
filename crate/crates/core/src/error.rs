use std::path::PathBuf;

use crate::geometry::BallPoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Non-finite or otherwise unusable input values.
    #[error("invalid data at row {row}: {reason}")]
    InvalidData { row: usize, reason: String },

    /// A denominator or `atanh` argument came too close to a singularity,
    /// which happens for points pressed against the ball boundary.
    #[error("numerically degenerate: {0}")]
    NumericDegenerate(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure {
        iterations: usize,
        residual: f64,
        last: Box<BallPoint>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}{}: {reason}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: u64,
        column: Option<usize>,
        reason: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::NumericDegenerate(msg.into())
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NumericDegenerate(_) | Error::ConvergenceFailure { .. })
    }
}
