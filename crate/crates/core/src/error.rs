use thiserror::Error;

/// Errors produced by the simulator and the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Gram-Schmidt could not separate the two channel directions.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
