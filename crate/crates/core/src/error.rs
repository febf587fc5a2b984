//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across loading, training, calibration and
/// experiment orchestration. Each variant maps to a stable machine-readable
/// kind string (see [`Error::kind`]) used by the CLI's JSON error output.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed input file. `line` is 1-based; 0 when not attributable.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("label cardinality error: {message}")]
    LabelCardinality { message: String },

    #[error("shape error: {message}")]
    Shape { message: String },

    #[error("configuration error: {message}")]
    Config { message: String },

    #[error("stratification error: {message}")]
    Stratification { message: String },

    #[error("infeasible split: {message}")]
    Infeasible { message: String },

    #[error("training error: {message}")]
    Training { message: String },

    #[error("fit error: {message}")]
    Fit { message: String },

    #[error("range error: {message}")]
    Range { message: String },

    #[error("undefined metric: {message}")]
    UndefinedMetric { message: String },

    #[error("unsupported schema version {found} (supported: {supported})")]
    SchemaVersion { found: u32, supported: u32 },
}

impl Error {
    /// Stable identifier for machine-readable error reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Format { .. } => "format",
            Error::LabelCardinality { .. } => "label_cardinality",
            Error::Shape { .. } => "shape",
            Error::Config { .. } => "config",
            Error::Stratification { .. } => "stratification",
            Error::Infeasible { .. } => "infeasible",
            Error::Training { .. } => "training",
            Error::Fit { .. } => "fit",
            Error::Range { .. } => "range",
            Error::UndefinedMetric { .. } => "undefined_metric",
            Error::SchemaVersion { .. } => "schema_version",
        }
    }
}

pub(crate) fn shape(message: impl Into<String>) -> Error {
    Error::Shape { message: message.into() }
}

pub(crate) fn config(message: impl Into<String>) -> Error {
    Error::Config { message: message.into() }
}

pub(crate) fn training(message: impl Into<String>) -> Error {
    Error::Training { message: message.into() }
}

pub(crate) fn fit(message: impl Into<String>) -> Error {
    Error::Fit { message: message.into() }
}
