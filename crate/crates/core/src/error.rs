use thiserror::Error;

/// Errors produced by the RTD library.
#[derive(Debug, Error)]
pub enum RtdError {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("gradient singularity: points {i} and {j} coincide in the {cloud} cloud")]
    Singularity { cloud: &'static str, i: usize, j: usize },

    #[error("at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<RtdError>,
    },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl RtdError {
    /// Whether this is a gradient singularity, possibly wrapped with a step.
    pub fn is_singularity(&self) -> bool {
        match self {
            RtdError::Singularity { .. } => true,
            RtdError::AtStep { source, .. } => source.is_singularity(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, RtdError>;
