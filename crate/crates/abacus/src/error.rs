use std::io;

/// Errors surfaced by stream ingestion, estimation, and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("no parseable lines in input")]
    EmptyStream,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stream invariant violated at index {index}: {reason}")]
    StreamInvariantViolation { index: u64, reason: String },

    /// Fewer than three prior live edges; the butterfly discovery
    /// probability is undefined and no increment can be scaled.
    #[error("degenerate stream: fewer than three live edges")]
    DegenerateStream,

    #[error("butterfly population too large to enumerate ({0} butterflies)")]
    CensusOverflow(u64),

    #[error("relative error undefined for non-positive exact count")]
    UndefinedMetric,

    #[error("estimate mismatch between runs: {0}")]
    EquivalenceViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
