use thiserror::Error;

/// Errors raised by mesh construction, assembly, solves and I/O.
#[derive(Debug, Error)]
pub enum DpgError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("test inner product is not positive definite on cell {cell}")]
    NormNotPositiveDefinite { cell: usize },

    #[error("assembly failed on cell {cell}: {reason}")]
    Assembly { cell: usize, reason: String },

    #[error("global system is singular: {0}")]
    SingularSystem(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("eigen-solver failure: {0}")]
    Probe(String),

    #[error("cycle {cycle}: {source}")]
    Cycle {
        cycle: usize,
        #[source]
        source: Box<DpgError>,
    },

    #[error("{label}: {source}")]
    Labeled {
        label: String,
        #[source]
        source: Box<DpgError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = DpgError> = std::result::Result<T, E>;

impl DpgError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        DpgError::InvalidInput(msg.into())
    }
}
