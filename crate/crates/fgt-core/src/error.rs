use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must live in the same ambient space do not.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A measure violated one of its construction invariants.
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Sampled or computed values left the admissible value box.
    #[error("value {value} outside [-{bound}, {bound}]")]
    ValueOutOfRange { value: f64, bound: f64 },

    /// A computation produced a NaN or infinity.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Shape bookkeeping failure in the tape or a forward pass.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Readout fibers disagree beyond tolerance.
    #[error("fiber values disagree by {spread}, tolerance {tol}")]
    FiberDisagreement { spread: f64, tol: f64 },

    /// Serialization problems on the external interfaces.
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
