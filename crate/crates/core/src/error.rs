use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown sense `{sense}` for term `{term}`")]
    UnknownSense { term: String, sense: String },

    #[error("dangling citation reference `{0}`")]
    DanglingCitation(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("missing annotation layer `{layer}` on citation `{citation}`")]
    MissingLayer { layer: &'static str, citation: String },

    #[error("no POS available for citation `{0}`")]
    NoPos(String),

    #[error("empty vocabulary after min_count filtering")]
    EmptyVocabulary,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("malformed model file: {0}")]
    Format(String),

    #[error("stale cache: {0}")]
    StaleCache(String),

    #[error("term `{term}`, fold {fold}")]
    InFold {
        term: String,
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for failures of the numerical routines rather than of the input data.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NonFinite(_) | Error::Numeric(_) | Error::StaleCache(_) => true,
            Error::InFold { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
