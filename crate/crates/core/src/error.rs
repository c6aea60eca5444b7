use thiserror::Error;

/// Errors raised by relation computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("ambient dimension must be at least 1")]
    EmptyAmbient,

    #[error("numerical degeneracy in {what}: distance {distance:e} exceeds {threshold:e}")]
    Degenerate {
        what: String,
        distance: f64,
        threshold: f64,
    },

    #[error("inconsistent verdicts: {0}")]
    Inconsistent(String),

    #[error("pair is not an element of the relation (distance {0:e})")]
    NotInGraph(f64),

    #[error("relation is not single-valued (dim mul = {0})")]
    NotSingleValued(usize),

    #[error("operator is not defined on the whole space (dim dom = {dom}, expected {expected})")]
    NotEverywhereDefined { dom: usize, expected: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadratic problem is unbounded below: {0}")]
    Unbounded(String),

    #[error("invalid characteristic matrix: {0}")]
    InvalidCharacteristic(String),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T, E = RelError> = std::result::Result<T, E>;

pub(crate) fn ensure_dims(what: &str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(RelError::DimensionMismatch(format!(
            "{what}: got {got}, expected {expected}"
        )))
    }
}
