use thiserror::Error;

/// Errors produced by the core numerical and learning operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Incompatible shapes were passed to an operation.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A matrix entry was NaN or infinite at construction time.
    #[error("non-finite entry at row {row}, col {col}")]
    NonFinite { row: usize, col: usize },

    /// An operation needed more numerical rank than the input carries.
    /// Carries the full singular value sequence for diagnosis.
    #[error("rank deficient: required {required}, effective rank {rank}")]
    RankDeficient {
        required: usize,
        rank: usize,
        singular_values: Vec<f64>,
    },

    /// A non-shape precondition was violated.
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
