use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input. `context` names the offending field or matrix.
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("invalid network: {0}")]
    Validation(String),

    #[error("branch {branch} has zero series impedance")]
    SingularBranch { branch: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("formulation error: {0}")]
    Formulation(String),

    #[error("branch {branch} is flow limited but has no limit")]
    MissingLimit { branch: usize },

    #[error("duplicate 2x2 minor ({0}, {1})")]
    DuplicateMinor(usize, usize),

    #[error("matrix order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("pattern is not chordal under the given ordering")]
    NotChordal,

    #[error("pattern is disconnected")]
    Disconnected,

    #[error("entry ({0}, {1}) is not covered by any clique")]
    UncoveredEntry(usize, usize),

    #[error("strategy error: {0}")]
    Strategy(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported cone segment for this format: {0}")]
    UnsupportedSegment(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("no blocks to analyze")]
    EmptyBlocks,

    #[error("consistency strategy does not couple phases; voltages cannot be recovered")]
    InsufficientCoupling,

    #[error("phase mismatch {mismatch:.3e} between clique {clique} and its parent")]
    PhaseInconsistent { clique: usize, mismatch: f64 },

    #[error("block {block} is not numerically rank one (eigenvalue ratio {ratio:.3e})")]
    NotRankOne { block: usize, ratio: f64 },

    #[error("normalizing objective must be positive, got {0}")]
    NonpositiveBase(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
