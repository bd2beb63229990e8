use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // dataset ingestion and validation
    #[error("non-uniform or non-monotone wavelength grid: {0}")]
    NonUniformGrid(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("missing label for sample `{0}`")]
    MissingLabel(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid spectrum `{id}`: {reason}")]
    InvalidSpectrum { id: String, reason: String },
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("too few samples: {0}")]
    TooFewSamples(String),
    #[error("insufficient reference samples: {0}")]
    InsufficientReferenceSamples(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    // preprocessing
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("window of {window} points exceeds spectrum length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("constant spectrum `{0}`")]
    ConstantSpectrum(String),
    #[error("degenerate regression against reference for `{0}` (|slope| < 1e-12)")]
    DegenerateRegression(String),
    #[error("step {index} ({kind}) operates on a whole batch and cannot be applied to a single spectrum")]
    BatchOnlyStep { index: usize, kind: String },
    #[error("preprocessing step {index} ({kind}) failed: {source}")]
    StepFailed {
        index: usize,
        kind: String,
        #[source]
        source: Box<Error>,
    },

    // feature extraction
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },
    #[error("degenerate response: {0}")]
    DegenerateResponse(String),
    #[error("non-positive intensity at index {0}")]
    NonPositiveIntensity(usize),
    #[error("constant reference curve `{0}`")]
    ConstantReference(String),
    #[error("negative input entry at ({row}, {col})")]
    NegativeInput { row: usize, col: usize },

    // metrics
    #[error("id mismatch: {0}")]
    IdMismatch(String),
    #[error("AUC needs at least one positive and one negative sample")]
    SingleClass,
    #[error("truth values are constant; R² is undefined")]
    ConstantTruth,

    // baselines
    #[error("covariance is singular even after regularisation")]
    SingularCovariance,
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
