use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incompatible grids: {0}")]
    IncompatibleGrid(String),

    #[error("exact oracle not supported for {0}")]
    UnsupportedOracle(String),

    #[error("benchmark not supported: {0}")]
    UnsupportedBenchmark(String),

    #[error("infeasible LP: every profit coefficient is negative")]
    Infeasible,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
