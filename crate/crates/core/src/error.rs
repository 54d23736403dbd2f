use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("no predictions for class {class}; every class needs at least one")]
    EmptyClass { class: usize },

    #[error("degenerate evidence: every hypothesis has zero likelihood for signature {signature}")]
    DegenerateEvidence { signature: String },

    #[error("training diverged at epoch {epoch} (loss = {loss})")]
    Divergence { epoch: usize, loss: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("bad magic number in {what}: expected {expected:#010x}, found {found:#010x}")]
    BadMagic {
        what: &'static str,
        expected: u32,
        found: u32,
    },

    #[error("truncated {what}: need {needed} bytes, have {available}")]
    Truncated {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("count mismatch: {images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for bad parameters or configuration.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Parameter(_) | Error::Config(_))
    }

    /// True for failures that stem from the numbers rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::DegenerateEvidence { .. } | Error::Divergence { .. })
    }

    /// True for failures reading or validating data files.
    pub fn is_data(&self) -> bool {
        matches!(
            self,
            Error::BadMagic { .. }
                | Error::Truncated { .. }
                | Error::CountMismatch { .. }
                | Error::Format { .. }
                | Error::Io { .. }
                | Error::EmptyClass { .. }
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
