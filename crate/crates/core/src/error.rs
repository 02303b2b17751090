use std::path::PathBuf;

use thiserror::Error;

use crate::data::ViewId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse failure in {context}: {message}")]
    ParseFailure { context: String, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("auxiliary and target class sets overlap on {0:?}")]
    DisjointnessViolated(Vec<String>),

    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("eigen-solver failure: {0}")]
    EigenFailure(String),

    #[error("bandwidth is degenerate: every squared similarity is zero")]
    DegenerateBandwidth,

    #[error("propagation system (eta*Pi + L) is singular")]
    SingularPropagation,

    #[error("no supervision: neither prototypes nor labelled instances were supplied")]
    NoSupervision,

    #[error("view {0} is not available")]
    MissingView(ViewId),

    #[error("target labels are required for evaluation")]
    MissingLabels,

    #[error("invalid variant: {0}")]
    InvalidVariant(String),

    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error("ground truth is empty")]
    EmptyTruth,

    #[error("class {0} has no instances in the ground truth")]
    ClassAbsent(String),

    #[error("mismatched node sets: {0}")]
    NodeSetMismatch(String),

    #[error("serialization failure: {0}")]
    Serialization(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI's JSON error output and
    /// mapped onto the C error codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "Io",
            Error::ParseFailure { .. } => "ParseFailure",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::DisjointnessViolated(_) => "DisjointnessViolated",
            Error::NonFinite { .. } => "NonFinite",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::SingularSystem(_) => "SingularSystem",
            Error::EigenFailure(_) => "EigenFailure",
            Error::DegenerateBandwidth => "DegenerateBandwidth",
            Error::SingularPropagation => "SingularPropagation",
            Error::NoSupervision => "NoSupervision",
            Error::MissingView(_) => "MissingView",
            Error::MissingLabels => "MissingLabels",
            Error::InvalidVariant(_) => "InvalidVariant",
            Error::EmptyVocabulary => "EmptyVocabulary",
            Error::EmptyTruth => "EmptyTruth",
            Error::ClassAbsent(_) => "ClassAbsent",
            Error::NodeSetMismatch(_) => "NodeSetMismatch",
            Error::Serialization(_) => "Serialization",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ParseFailure {
            context: context.into(),
            message: message.into(),
        }
    }
}
