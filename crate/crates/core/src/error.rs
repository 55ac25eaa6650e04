use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A computation would exceed its work budget.
    #[error("resource budget exceeded: {0}")]
    Resource(String),

    /// A numerical procedure failed (singular system, non-finite values).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Fewer than `m` linearly independent votes were available, so no
    /// weighting can reproduce the ideal vector.
    #[error("representational deficiency: vote rank {rank} < {m} classes")]
    RepresentationalDeficiency { rank: usize, m: usize },

    /// A raw score vector had no positive mass to normalize.
    #[error("degenerate vote: all {m} scores are zero")]
    DegenerateVote { m: usize },

    /// Correlation is undefined because an input has zero variance.
    #[error("correlation undefined: {0} has zero variance")]
    UndefinedCorrelation(&'static str),

    /// Malformed dataset or vote dump.
    #[error("ingestion error at line {line}: {message}")]
    Ingestion { line: u64, message: String },

    /// An error raised inside one experiment cell.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with any cell context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn ingestion(line: u64, msg: impl Into<String>) -> Self {
        Error::Ingestion {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
