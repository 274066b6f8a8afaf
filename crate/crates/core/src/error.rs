//! Crate-wide error type.

use crate::lattice::SiteId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice dimensions must be at least 1x1 (got {n_u}x{n_v})")]
    ZeroDimension { n_u: u32, n_v: u32 },

    #[error("duplicate hole {0}")]
    DuplicateHole(SiteId),

    #[error("site {0} is outside the lattice")]
    SiteOutOfBounds(SiteId),

    #[error("operation requires lattice kind {expected}, got {got}")]
    WrongLatticeKind { expected: String, got: String },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("{field} evaluates to {value}, outside its valid range")]
    FieldOutOfRange { field: String, value: f64 },

    #[error("patch of {n} sites exceeds the dense-engine limit of {max}")]
    PatchTooLarge { n: usize, max: usize },

    #[error("measurement setting {setting} is incompatible with {context}")]
    SettingMismatch { setting: String, context: String },

    #[error("shot batches disagree on {0}; refusing to combine")]
    ProvenanceMismatch(String),

    #[error("malformed shot file: {0}")]
    MalformedShotFile(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 flags inconsistent input data,
    /// 1 everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::ProvenanceMismatch(_) => 2,
            _ => 1,
        }
    }
}
