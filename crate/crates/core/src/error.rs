use thiserror::Error;

use crate::engine::TrackId;

/// Errors raised by the filter and its models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("model configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    Dimension {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    /// A detection was proposed for a distribution that cannot produce it.
    #[error("association impossible: zero likelihood for observation")]
    ZeroLikelihood,

    #[error("degenerate update: every association scheme has zero weight")]
    DegenerateUpdate,

    #[error("unknown track {0}")]
    UnknownTrack(TrackId),

    #[error("invalid filter state: {0}")]
    InvalidState(String),

    #[error("no point estimate: presence is zero")]
    NoEstimate,

    #[error("oracle input exceeds enumeration limits: {0}")]
    OracleLimit(String),

    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
