//! Clients for external scorers: child processes speaking the `scorer/1`
//! line protocol, and HTTP endpoints for scores and token surprisals.

mod http;
mod process;
pub mod protocol;
mod spec;

use std::io;
use std::time::Duration;

use thiserror::Error;

pub use http::{fetch_surprisals, HttpOptions, HttpScorer};
pub use process::{ProcessOptions, ProcessScorer};
pub use protocol::{Handshake, ScoreRequest, ScoreResponse, PROTOCOL};
pub use spec::{connect, ScorerSpec, Transport};

/// Default per-batch timeout.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("could not start scorer '{command}': {reason}")]
    SpawnFailure { command: String, reason: String },
    #[error("scorer speaks '{got}', expected '{expected}'")]
    HandshakeMismatch { expected: String, got: String },
    #[error("malformed line from scorer ({reason}): {line}")]
    ProtocolError { line: String, reason: String },
    #[error("scorer exited unexpectedly{}", .status.as_deref().map(|s| format!(" ({s})")).unwrap_or_default())]
    ScorerCrashed { status: Option<String> },
    #[error("scorer did not answer within {0:?}")]
    Timeout(Duration),
    #[error("scorer rejected request {id}: {message}")]
    Rejected { id: u64, message: String },
    #[error("HTTP request failed: {0}")]
    Http(String),
    #[error("endpoint response violates the schema: {0}")]
    SchemaError(String),
    #[error("invalid scorer spec '{0}': expected [id=]cmd:<command> or [id=]http:<url>")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl AdapterError {
    /// Failures that a fresh process might not repeat.
    pub fn is_transient(&self) -> bool {
        matches!(self, AdapterError::ScorerCrashed { .. } | AdapterError::Timeout(_))
    }
}
