//! Crate-wide error type.

use std::path::PathBuf;

/// Errors surfaced by any stage of the pipeline.
///
/// Candidate failures (code that does not compile, testbenches that fail)
/// are *values*, not errors: they flow through rewards. Errors here mean the
/// pipeline itself could not proceed.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A document produced zero tokens after comment stripping.
    #[error("empty document: no tokens after comment stripping")]
    EmptyDocument,

    /// Two signatures were built with different parameters or seeds.
    #[error("incompatible signatures: {0}")]
    IncompatibleSignatures(String),

    /// The configured simulator toolchain is not installed or not runnable.
    /// This is a configuration problem, never a candidate failure.
    #[error("toolchain missing: {0}")]
    ToolchainMissing(String),

    /// Transport failed after all retries were exhausted.
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),

    /// The backend answered with something we could not parse.
    #[error("protocol error: {0}")]
    ProtocolError(String),

    /// A required `<TAG>...</TAG>` block was missing or unclosed.
    #[error("tag not found: <{0}>")]
    TagNotFound(String),

    /// Problem rewriting produced no usable question.
    #[error("rewrite failed for entry {entry_id}: {reason}")]
    RewriteFailed { entry_id: String, reason: String },

    /// Testbench synthesis produced zero valid benches within budget.
    #[error("augmentation failed for problem {problem_id}: {reason}")]
    AugmentationFailed { problem_id: String, reason: String },

    /// Vector or list lengths did not line up.
    #[error("shape error: expected {expected}, got {got}")]
    ShapeError { expected: usize, got: usize },

    /// Batch statistics need at least two samples.
    #[error("batch too small: {0} samples (need >= 2)")]
    BatchTooSmall(usize),

    /// pass@k requested with k > n.
    #[error("invalid k: k={k} exceeds n={n}")]
    InvalidK { k: usize, n: usize },

    /// A stage was started before its inputs exist.
    #[error("stage input missing: {0}")]
    StageInputMissing(PathBuf),

    /// Configuration failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 stage input, 4 backend/toolchain.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::StageInputMissing(_) => 3,
            Error::ToolchainMissing(_) | Error::BackendUnavailable(_) | Error::ProtocolError(_) => 4,
            _ => 1,
        }
    }
}
