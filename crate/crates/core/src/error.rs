use thiserror::Error;

/// Errors produced across the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A word contains a letter outside the oracle's alphabet.
    #[error("unknown letter {letter:?} for oracle {oracle}")]
    Alphabet { letter: String, oracle: String },

    /// A computation exceeded its resource budget (word length, ball size,
    /// power budget). The limiting parameter is named.
    #[error("resource budget exceeded: {0}")]
    Resource(String),

    /// An operation was called on input violating its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Degenerate input (e.g. the zero pseudocharacter where a nonzero one
    /// is required).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A graph expected to be connected is not; a separated pair is named.
    #[error("graph is disconnected: no path between {0} and {1}")]
    Disconnected(usize, usize),

    /// Internal consistency failure (indicates an invalid oracle, scaling,
    /// or a bug).
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// Config file parse error with line/field diagnostics.
    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
