use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("invalid spec `{id}`: {reason}")]
    InvalidSpec { id: String, reason: String },

    #[error("layout is empty")]
    EmptyLayout,

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in record {record} at byte {offset}: {message}")]
    Parse {
        record: usize,
        offset: usize,
        message: String,
    },

    #[error("generation exhausted after {attempts} attempts (seed {seed}); re-seed")]
    GenerationExhausted { seed: u64, attempts: u32 },

    #[error("extraction failed: {}", .diagnostics.join("; "))]
    ExtractionFailed { diagnostics: Vec<String> },

    #[error("schema error at element {index}: {problem} {field}")]
    Schema {
        index: usize,
        field: String,
        problem: &'static str,
    },

    #[error(transparent)]
    Transport(#[from] crate::modelclient::TransportError),

    #[error("render error: {0}")]
    Render(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
