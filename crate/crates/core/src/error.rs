use thiserror::Error;

/// Errors produced by sequence construction, state algebra and correlation analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "polynomial {poly:?} is not primitive over GF({p}): LFSR period {period} != {expected}"
    )]
    NotPrimitive {
        p: u32,
        poly: Vec<u32>,
        period: u64,
        expected: u64,
    },

    #[error("label {0:?} is not a member of the sequence set")]
    UnknownLabel(Vec<u32>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized: squared norm {norm_sq} differs from 1")]
    Normalization { norm_sq: f64 },

    #[error("states are built over different sequence sets")]
    IncompatibleSets,

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("matrix is not unitary (max |UU^dagger - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("unsupported state form: {0}")]
    UnsupportedForm(String),

    #[error("degenerate preparation: {0}")]
    DegeneratePreparation(String),

    #[error("capacity exceeded: {fields} fields need p^s - 1 >= {fields} distinct nonzero labels, set offers {available}")]
    Capacity { fields: usize, available: usize },

    #[error("expected {expected} angles (one per field), got {got}")]
    AngleCount { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
