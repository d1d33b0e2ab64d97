use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed JSON: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: record {id:?} violates schema: {}", .violations.join("; "))]
    Schema {
        line: usize,
        id: String,
        violations: Vec<String>,
    },

    #[error("duplicate id {id:?} (line {line})")]
    DuplicateId { id: String, line: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("score vectors {left:?} and {right:?} are not aligned to the same id list")]
    Misaligned { left: String, right: String },

    #[error("{0}")]
    MissingInput(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("unknown id {id:?} at line {line}")]
    UnknownId { id: String, line: usize },

    #[error("missing scores for ids: {}", .0.join(", "))]
    MissingIds(Vec<String>),

    #[error("line {line}: cannot parse score: {message}")]
    ScoreParse { line: usize, message: String },

    #[error("{rejected} of {total} judge replies unparseable (more than 10%)")]
    TooManyUnparseable { rejected: usize, total: usize },

    #[error("linear algebra failure: {0}")]
    LinAlg(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
