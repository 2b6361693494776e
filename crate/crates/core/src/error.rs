use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("string shorter than gram length ({len} < {gram_len})")]
    StringTooShort { len: usize, gram_len: usize },

    #[error("span exceeds string (pos {pos}, len {len}, string length {string_len})")]
    SpanOutOfRange {
        pos: usize,
        len: usize,
        string_len: usize,
    },

    #[error("gram {0:?} has no entry in the lookup table")]
    UnknownGram(String),

    #[error("lookup table holds {table}-grams but {requested}-grams were requested")]
    GramLengthMismatch { table: usize, requested: usize },

    #[error("fixture line {line}: {reason}")]
    Fixture { line: usize, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("{path}: line {line} is empty or whitespace only")]
    BlankLine { path: PathBuf, line: usize },

    #[error("conflicting flags: {0}")]
    ConflictingFlags(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
