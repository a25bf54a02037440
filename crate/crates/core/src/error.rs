use std::path::PathBuf;

use crate::image::Dims;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: Dims, found: Dims },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image contains non-finite values")]
    NonFinite,

    #[error(transparent)]
    Pgm(#[from] PgmError),

    #[error("conjugate gradient breakdown after {iterations} iterations: {reason}")]
    CgBreakdown { iterations: usize, reason: &'static str },

    #[error("denoiser `{name}` failed: {reason}")]
    Denoiser { name: String, reason: String },

    #[error("step size was halved {0} consecutive times without meeting the growth bound")]
    StepSizeCollapse(usize),

    #[error("trace has no PSNR column")]
    MissingPsnr,

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

/// Failures while decoding a PGM stream.
#[derive(Debug, thiserror::Error)]
pub enum PgmError {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    #[error("unsupported PGM maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),

    #[error("truncated PGM payload: expected {expected} samples, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("PGM sample {0} exceeds maxval")]
    SampleOutOfRange(u32),

    #[error("PGM I/O: {0}")]
    Io(#[from] std::io::Error),
}
