use std::path::PathBuf;

/// Errors produced by the modulation, spectrum and file-handling routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("symbol {value} out of range for alphabet size {m}")]
    SymbolOutOfRange { value: u32, m: usize },

    #[error("time {t} s outside the symbol interval [0, {ts}{close}")]
    TimeOutOfRange { t: f64, ts: f64, close: char },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{samples} samples do not split into whole symbols of {per_symbol} samples ({trailing} trailing)")]
    TrailingSamples {
        samples: usize,
        per_symbol: usize,
        trailing: usize,
    },

    #[error("sample rate {fs} Hz is not an integer multiple of the chip rate {chip_rate} Hz")]
    SampleRateMismatch { fs: f64, chip_rate: f64 },

    #[error("requested fraction {requested} unreachable: only {captured} captured within +/-{half_span_hz} Hz")]
    FractionUnreachable {
        requested: f64,
        captured: f64,
        half_span_hz: f64,
    },

    #[error(
        "mask segment rbw {rbw_hz} Hz is not an integer multiple of the bin width {bin_hz} Hz"
    )]
    RbwMismatch { rbw_hz: f64, bin_hz: f64 },

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
