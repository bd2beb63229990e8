use thiserror::Error;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("knowledge base is empty")]
    EmptyCorpus,
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("line {line}: {reason}")]
    BadRecord { line: usize, reason: String },
    #[error("no hit resolves to a usable plan: {0}")]
    NoResolvablePlan(String),
    #[error("not an index cache: {0}")]
    BadCache(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] irspec_core::Error),
}

pub type Result<T> = std::result::Result<T, KbError>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> KbError + '_ {
    move |source| KbError::Io {
        path: path.display().to_string(),
        source,
    }
}
