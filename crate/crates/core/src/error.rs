use thiserror::Error;

/// Errors raised by the core algorithms and file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point ({birth}, {death}): birth must be finite and strictly below death")]
    InvalidPoint { birth: f64, death: f64 },

    #[error("invalid norm exponent q = {0}: must satisfy q >= 1")]
    InvalidExponent(f64),

    #[error("invalid rectangle [{x_min}, {x_max}] x [{y_min}, {y_max}]")]
    InvalidRectangle {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },

    #[error("kernel rectangle must be symmetric about the origin with positive area")]
    AsymmetricKernel,

    #[error("invalid distance matrix: {0}")]
    InvalidDistanceMatrix(String),

    #[error("malformed boundary matrix at column {column}: {reason}")]
    MalformedBoundary { column: usize, reason: String },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid shape parameters: {0}")]
    InvalidShape(String),

    #[error("k-nearest-neighbour graph is disconnected ({components} components); increase k")]
    DisconnectedGraph { components: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("patch of side {size} does not fit in a {width}x{height} region")]
    PatchTooLarge { size: usize, width: usize, height: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
