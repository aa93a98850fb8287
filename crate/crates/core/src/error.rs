//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid kernel parameters: {0}")]
    InvalidKernelParams(String),

    #[error("observation set is empty")]
    EmptyObservations,

    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("duplicate training locations at indices {first} and {second}")]
    DuplicateLocation { first: usize, second: usize },

    #[error("gradient array shape mismatch: expected {n} x {d}")]
    GradientShape { n: usize, d: usize },

    #[error("gradient observations required but absent")]
    MissingGradients,

    #[error("high-fidelity location {location} (index {index}) has no low-fidelity match")]
    NotNested { index: usize, location: String },

    #[error("covariance matrix not positive definite after jitter escalation to {max_jitter:e}")]
    NotPositiveDefinite { max_jitter: f64 },

    #[error("vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid search box: {0}")]
    InvalidSearchBox(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidGaConfig(String),

    #[error("every hyperparameter candidate in the initial generation failed")]
    AllCandidatesFailed,

    #[error("model is {got}, operation requires {expected}")]
    ModelKindMismatch { expected: String, got: String },

    #[error("posterior variance inconsistency: raw value {raw} below tolerance at scale {scale}")]
    VarianceInconsistency { raw: f64, scale: f64 },

    #[error("truth vector has zero norm; relative MSE undefined")]
    ZeroTruthNorm,

    #[error("training {model} failed: {source}")]
    Training {
        model: String,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown benchmark case `{0}`")]
    UnknownCase(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing columns: {0}")]
    MissingColumns(String),

    #[error("finite-difference gradients unavailable: {0}")]
    FiniteDifference(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps a training failure with the model name for reporting.
    pub fn training(model: &str, source: Error) -> Self {
        Error::Training {
            model: model.to_string(),
            source: Box::new(source),
        }
    }
}
