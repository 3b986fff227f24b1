use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate channel: cannot take the orthogonal complement of a zero vector")]
    DegenerateChannel,

    #[error("near-singular estimate: |denominator| = {magnitude:e} below threshold {threshold:e}")]
    NearSingular { magnitude: f64, threshold: f64 },

    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("overheard interference could not be rebuilt from the retransmitting TX's view")]
    ReconstructionMismatch,

    #[error("malformed table: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors a Monte-Carlo caller should resample rather than abort on.
    pub fn is_resample(&self) -> bool {
        matches!(self, Error::NearSingular { .. } | Error::DegenerateChannel)
    }
}
