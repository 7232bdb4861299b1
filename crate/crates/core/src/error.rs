use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent user input (unknown names, bad arguments).
    #[error("input error: {0}")]
    Input(String),

    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },

    /// A joint action was not enabled at the state it was applied to.
    #[error("protocol error: action `{action}` of agent `{agent}` is not enabled at state `{state}`")]
    Protocol { agent: String, state: String, action: String },

    /// The formula lies outside the fragment an operation supports.
    #[error("fragment error: {0}")]
    Fragment(String),

    /// The brute-force oracle was asked to enumerate beyond its bounds.
    #[error("oracle scale exceeded: {0}")]
    OracleScale(String),

    #[error("generation failed: {0}")]
    Generation(String),

    /// The model violates structural invariants; see the attached report.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}
