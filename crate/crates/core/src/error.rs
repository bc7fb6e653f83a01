use std::path::PathBuf;

use crate::annotation::TreeViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// Variants are grouped by how a caller is expected to react: input and
/// consistency problems (fix the data), provider problems (retry later or fix
/// credentials), and judge problems (the CQ is flagged and excluded).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("empty input")]
    EmptyInput,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("annotation {cq_id:?}: {violation}")]
    Tree {
        cq_id: String,
        violation: TreeViolation,
    },

    #[error("annotation {cq_id:?}: {message}")]
    Span { cq_id: String, message: String },

    #[error("dimension mismatch for {id:?}: expected {expected}, found {found}")]
    Dimension {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("no vector for cq ids: {}", .missing.join(", "))]
    Coverage { missing: Vec<String> },

    #[error("set too small: need at least {needed} items, found {found}")]
    InsufficientSet { needed: usize, found: usize },

    #[error("degenerate set {0:?}: centroid is the zero vector")]
    DegenerateSet(String),

    #[error("provider {provider_id}: {message}")]
    Provider {
        provider_id: String,
        status: Option<u16>,
        message: String,
    },

    #[error("environment variable {var} is not set (it must hold the API key for provider {provider_id})")]
    MissingCredential { provider_id: String, var: String },

    #[error("provider {0} returned no parseable competency questions")]
    EmptyGeneration(String),

    #[error("primitive extraction failed for {cq_id:?}: {message}")]
    Extraction { cq_id: String, message: String },

    #[error("relevance judgment failed for {cq_id:?}: {message}")]
    Judgment { cq_id: String, message: String },

    #[error("inconsistent inputs: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by a remote provider or missing credentials.
    pub fn is_provider(&self) -> bool {
        matches!(
            self,
            Error::Provider { .. } | Error::MissingCredential { .. } | Error::EmptyGeneration(_)
        )
    }

    /// True for failures caused by malformed or inconsistent user input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation(_)
                | Error::DuplicateId(_)
                | Error::EmptyInput
                | Error::Domain(_)
                | Error::Tree { .. }
                | Error::Span { .. }
                | Error::Dimension { .. }
                | Error::Coverage { .. }
                | Error::InsufficientSet { .. }
                | Error::DegenerateSet(_)
                | Error::Consistency(_)
        )
    }
}
