use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid weight {weight} for `{term}`: weights must be finite and non-negative")]
    InvalidWeight { term: String, weight: f64 },

    #[error("topic `{topic}` has no `{variant}` variant")]
    MissingVariant { topic: String, variant: String },

    #[error("wrong index mode: {0}")]
    WrongMode(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("topic sets differ: {0}")]
    TopicMismatch(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// Attach the originating file to a content error.
    pub(crate) fn in_file(self, path: &std::path::Path) -> Self {
        match self {
            e @ (Error::Io { .. } | Error::InFile { .. }) => e,
            other => Error::InFile { path: path.to_path_buf(), source: Box::new(other) },
        }
    }

    /// The innermost error, looking through file context.
    pub fn root(&self) -> &Error {
        match self {
            Error::InFile { source, .. } => source.root(),
            other => other,
        }
    }
}
