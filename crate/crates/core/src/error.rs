use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("empty dimension")]
    EmptyDimension,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-numeric token {token:?} at line {line}, field {field}")]
    NonNumeric { line: usize, field: usize, token: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid label data: {0}")]
    InvalidLabels(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("empty input")]
    EmptyInput,

    #[error("linear solve failed in {0}: system is not positive definite or contains non-finite values")]
    LinearSolve(&'static str),

    #[error("non-finite value in {stage} at iteration {iteration}")]
    NumericalFailure { stage: &'static str, iteration: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(&'static str),

    #[error("layer {requested} requested but model has {depth} layers")]
    LayerOutOfRange { requested: usize, depth: usize },

    #[error("model has no trained layers")]
    EmptyModel,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable short identifier for each failure kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::MalformedHeader(_) => "malformed-header",
            Error::EmptyDimension => "empty-dimension",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::NonNumeric { .. } => "non-numeric",
            Error::NonFinite { .. } => "non-finite",
            Error::InvalidLabels(_) => "invalid-labels",
            Error::InvalidConfig(_) => "invalid-config",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Shape(_) => "shape",
            Error::LengthMismatch(..) => "length-mismatch",
            Error::EmptyInput => "empty-input",
            Error::LinearSolve(_) => "linear-solve",
            Error::NumericalFailure { .. } => "numerical-failure",
            Error::Eigen(_) => "eigen",
            Error::LayerOutOfRange { .. } => "layer-out-of-range",
            Error::EmptyModel => "empty-model",
        }
    }

    /// True for failures caused by the numerics rather than by inputs or the filesystem.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::LinearSolve(_) | Error::NumericalFailure { .. } | Error::Eigen(_)
        )
    }
}
