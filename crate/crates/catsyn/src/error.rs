//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Codebook construction or consistency failure.
    #[error("codebook: {0}")]
    Codebook(String),

    /// A codebook variable is absent from a CSV header.
    #[error("input is missing column '{variable}'")]
    MissingColumn { variable: String },

    /// A cell holds a label the codebook does not define for that variable.
    #[error("unknown level '{label}' for variable '{variable}' at data row {row}")]
    UnknownLevel {
        variable: String,
        row: usize,
        label: String,
    },

    /// A dataset ended up with zero rows.
    #[error("dataset has no rows ({context})")]
    EmptyDataset { context: String },

    /// An operation was asked to use a variable the codebook does not define.
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),

    /// Structural validation of datasets, states, or arguments failed.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Hyperparameter or config-document validation failed.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Model fitting could not proceed (not a validation problem).
    #[error("fit failed: {0}")]
    FitFailed(String),

    /// Design-matrix column labels disagree between fit and prediction input.
    #[error("design matrix mismatch: {0}")]
    DesignMismatch(String),

    #[error("snapshot format {found} is not supported (expected {expected})")]
    SnapshotVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("TOML parse error: {0}")]
    Toml(String),

    #[error("snapshot encode/decode error: {0}")]
    Snapshot(String),
}

impl Error {
    /// Validation errors exit the CLI with status 1, runtime errors with 2.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io(_) | Error::Snapshot(_) | Error::FitFailed(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
