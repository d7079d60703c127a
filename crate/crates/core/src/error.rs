use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("rank mismatch at bond {bond}: left core has {left}, right core has {right}")]
    RankMismatch { bond: usize, left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("dense materialization of {requested} entries exceeds the cap of {cap}")]
    DenseCap { requested: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field mismatch: expected {expected}, found {found}")]
    FieldMismatch { expected: crate::Field, found: crate::Field },

    #[error("breakdown at iteration {iteration}: {reason}")]
    Breakdown { iteration: usize, reason: String },

    #[error("ill-conditioned input: condition number {cond:.3e} exceeds {limit:.1e}")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("format error at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },

    #[error("truncated input at byte {offset}: expected {expected} bytes, found {actual}")]
    Truncated { offset: usize, expected: usize, actual: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
