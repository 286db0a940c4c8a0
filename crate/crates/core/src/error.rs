use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = AuditError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("empty cohort")]
    EmptyCohort,

    #[error("ACT outside concordance domain: {act} not in [{min}, {max}]")]
    ActOutOfDomain { act: u32, min: u32, max: u32 },

    #[error("invalid concordance table: {0}")]
    InvalidConcordance(String),

    #[error("invalid config `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("degenerate labels: both classes are required")]
    DegenerateLabels,

    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("stratum `{stratum}` has {size} records, needs at least {required}")]
    StratumTooSmall {
        stratum: String,
        size: usize,
        required: usize,
    },

    #[error("all records excluded: {0}")]
    AllRecordsExcluded(String),

    #[error("{0}")]
    InvalidArgument(String),
}

impl AuditError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AuditError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        AuditError::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
