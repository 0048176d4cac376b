//! Crate-wide error type.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the toolkit, from file parsing to
/// experiment configuration.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Reading file does not start with the `SRRD` magic.
    #[error("bad magic {found:?}, expected \"SRRD\"")]
    BadMagic { found: [u8; 4] },

    /// Reading file declares a format version this build does not understand.
    #[error("unsupported reading format version {0} (supported: 1)")]
    UnsupportedVersion(u16),

    /// Reading file ended before the declared payload was complete.
    #[error("truncated reading payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    /// Matrix/profile dimensions outside what an operation supports.
    #[error("invalid dimensions: {0}")]
    Dimensions(String),

    /// A value violates a domain invariant (range, positivity, ...).
    #[error("invalid value: {0}")]
    Value(String),

    /// Dataset manifest inconsistency (missing file, duplicate id, ...).
    #[error("dataset manifest: {0}")]
    Manifest(String),

    /// Bad or contradictory run configuration.
    #[error("configuration: {0}")]
    Config(String),

    /// A persisted artifact does not match what the operation expects
    /// (wrong extractor fingerprint, split plan from another dataset, ...).
    #[error("artifact mismatch: {0}")]
    Mismatch(String),
}
