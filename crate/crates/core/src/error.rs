use std::path::PathBuf;

/// Errors produced anywhere in the speller pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what} {value} outside valid range [{min}, {max})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("invalid timing configuration: {0}")]
    InvalidTiming(String),
    #[error("flash scheduling failed for sequence {sequence} after {retries} retries")]
    Scheduling { sequence: usize, retries: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("need at least {required} samples per class, got {actual}")]
    InsufficientData { required: usize, actual: usize },
    #[error("shrunk covariance is singular (lambda = {lambda}); use lambda > 0")]
    SingularCovariance { lambda: f64 },
    #[error("shrinkage intensity {0} not in [0, 1]")]
    InvalidShrinkage(f64),
    #[error("not enough evidence to select: {seen} flashes seen, need {required}")]
    NotEnoughEvidence { seen: usize, required: usize },
    #[error("object id {id} out of range (n = {n})")]
    InvalidObject { id: usize, n: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::InvalidTiming(_)
                | Error::InvalidManifest(_)
                | Error::InvalidObject { .. }
                | Error::InvalidShrinkage(_)
                | Error::Parse { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
