//! Crate-wide error types.

use thiserror::Error;

/// Errors surfaced by provider clients. Transport and rate-limit failures are
/// retryable; the rest are terminal.
#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("transport error: {0}")]
    Transport(String),

    #[error("rate limited by provider")]
    RateLimited,

    #[error("provider returned HTTP {status}: {body}")]
    Http { status: u16, body: String },

    #[error("response is not valid JSON after {attempts} attempts; raw text: {raw}")]
    MalformedJson { attempts: u32, raw: String },

    #[error("missing credentials: environment variable {0} is not set")]
    MissingCredentials(String),

    #[error("embedding dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("mock provider has no scripted reply for this request")]
    NoScriptedReply,
}

impl ProviderError {
    /// Whether a fresh attempt may succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            ProviderError::Transport(_) | ProviderError::RateLimited => true,
            ProviderError::Http { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error in {field}: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Provider(#[from] ProviderError),

    #[error("dataset error at line {line}: {message}")]
    Dataset { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("judge verdict invalid after re-prompt: {0}")]
    Verdict(String),

    #[error("undecodable image: {0}")]
    Image(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 1 for validation-style errors, 2 for
    /// provider failures that persisted through retries.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Provider(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
