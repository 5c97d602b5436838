use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("scaling factor {beta} at y={y} is not positive; calibration is inconsistent")]
    NonPositiveBeta { y: f64, beta: f64 },

    #[error("nothing to compose: patch list is empty")]
    NothingToCompose,

    #[error("patch {patch_id} exceeds detector capacity: scaled size {w:.1}x{h:.1} > {detector_size}")]
    PatchExceedsCapacity {
        patch_id: u32,
        w: f64,
        h: f64,
        detector_size: f64,
    },

    #[error("instance too large for oracle: {0}")]
    OracleTooLarge(String),

    #[error("detector: {0}")]
    Detector(#[from] crate::pipeline::detector::DetectorError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
