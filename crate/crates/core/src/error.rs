//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong in the engine. Variants correspond to the
/// contract violations named in the module documentation; all carry a
/// human-readable message with the offending data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("ring construction failed: {0}")]
    RingConstruction(String),

    #[error("grading error: {0}")]
    Grading(String),

    #[error("sector label kind mismatch: {0}")]
    LabelKind(String),

    #[error("incompatible sector kinds: {0}")]
    IncompatibleSectors(String),

    #[error("division by a purely nilpotent class: {0}")]
    NilpotentDivision(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("sector identification error: {0}")]
    Identification(String),

    #[error("mirror map is not invertible: {0}")]
    NotInvertible(String),

    #[error("cone slice out of contract (Birkhoff factorization not implemented): {0}")]
    ConeSliceOutOfContract(String),

    #[error("requested depth below the expansion window: {0}")]
    Window(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("root index too small: {0}")]
    RootIndexTooSmall(String),
}

pub type Result<T> = std::result::Result<T, Error>;
