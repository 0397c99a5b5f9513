use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input, located by file and line (and field when known).
    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error("dangling reference: {kind} '{id}' referenced by {referrer}")]
    DanglingReference {
        kind: &'static str,
        id: String,
        referrer: String,
    },

    #[error("duplicate {kind} '{id}'")]
    Duplicate { kind: &'static str, id: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown document '{0}'")]
    UnknownDocument(String),

    #[error("unknown id '{0}'")]
    UnknownId(String),

    #[error("invalid trie prefix {0:?}")]
    InvalidPrefix(Vec<String>),

    #[error("incomplete identifier {0:?}")]
    IncompleteIdentifier(Vec<String>),

    #[error("document '{0}' has no eligible tokens for an identifier")]
    NoEligibleTokens(String),

    #[error("facet '{0}' has no relevant documents")]
    NoRelevantDocuments(String),

    #[error("missing artifact for mode {mode}: {what}")]
    MissingArtifact { mode: String, what: String },

    #[error("facet sets differ: {0}")]
    FacetMismatch(String),

    #[error("unsupported artifact header: expected '{expected}', found '{found}'")]
    Header { expected: String, found: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.to_string(),
        }
    }

    /// Stable machine-parsable code used as the CLI error prefix.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "E_IO",
            Error::Parse { .. } => "E_PARSE",
            Error::DanglingReference { .. } => "E_REFERENCE",
            Error::Duplicate { .. } => "E_DUPLICATE",
            Error::Invariant(_) => "E_INVARIANT",
            Error::InvalidArgument(_) => "E_ARGUMENT",
            Error::UnknownDocument(_) => "E_UNKNOWN_DOC",
            Error::UnknownId(_) => "E_UNKNOWN_ID",
            Error::InvalidPrefix(_) => "E_PREFIX",
            Error::IncompleteIdentifier(_) => "E_INCOMPLETE",
            Error::NoEligibleTokens(_) => "E_NO_TOKENS",
            Error::NoRelevantDocuments(_) => "E_NO_RELEVANT",
            Error::MissingArtifact { .. } => "E_MISSING_ARTIFACT",
            Error::FacetMismatch(_) => "E_FACET_MISMATCH",
            Error::Header { .. } => "E_HEADER",
        }
    }
}
