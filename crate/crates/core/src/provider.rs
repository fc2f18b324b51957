//! Errors shared by every external provider (completion, translation,
//! embedding).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("provider unreachable: {0}")]
    Unreachable(String),
    #[error("no recorded response for prompt sha256 {0}")]
    MissingTranscript(String),
    #[error("no table entry for {0}")]
    MissingEntry(String),
    #[error("provider returned an unusable payload: {0}")]
    BadPayload(String),
}
