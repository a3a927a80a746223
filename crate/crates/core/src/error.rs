use thiserror::Error;

/// Unified error type for the verification engine.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A division or square root hit an argument below the singularity guard.
    #[error("singular evaluation ({what}) at point {point:?}")]
    SingularEvaluation { what: String, point: Vec<f64> },

    /// A field evaluation produced NaN or infinity.
    #[error("non-finite value at point {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Eigenvalues failed the pairing or separation requirements.
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    /// Input violates a stated precondition (non-antisymmetric, unpaired spectrum, ...).
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    /// Rejection sampling could not find an admissible point.
    #[error("sampling guard saturated after {attempts} attempts for model {model}")]
    GuardSaturated { model: String, attempts: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

impl CoreError {
    pub fn is_config_like(&self) -> bool {
        matches!(
            self,
            CoreError::Config(_) | CoreError::GuardSaturated { .. } | CoreError::Unsupported(_)
        )
    }
}
