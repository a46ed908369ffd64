use thiserror::Error;

/// Every failure the laboratory can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("inconsistent transition: {0}")]
    Inconsistent(String),

    #[error("degenerate distance: object {object_id} coincides with the agent at decision time")]
    DegenerateDistance { object_id: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
