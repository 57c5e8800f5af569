use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing header key `{0}`")]
    MissingHeaderKey(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },

    #[error("size mismatch for {what}: expected {expected}, got {actual}")]
    SizeMismatch {
        what: String,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("unknown band name `{0}`")]
    UnknownBand(String),

    #[error("missing band {0}")]
    MissingBand(String),

    #[error("band {band}: {count} of {total} pixels fell outside [0, 1] after scaling")]
    ScaleOutOfRange {
        band: String,
        count: usize,
        total: usize,
    },

    #[error("coordinate ({x}, {y}) lies outside the raster extent")]
    OutOfExtent { x: f64, y: f64 },

    #[error("crop window contains no valid pixels")]
    WindowAllNodata,

    #[error("invalid window side {0} m")]
    InvalidWindow(f64),

    #[error("band {0} has zero variance")]
    ZeroVariance(String),

    #[error("upsampling factor must be at least 1")]
    ZeroFactor,

    #[error("invalid Brovey weights: {0}")]
    InvalidWeights(String),

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("index denominator {0} is degenerate")]
    DegenerateDenominator(f64),

    #[error("thermal band is at or below epsilon on {bad} of {total} pixels")]
    ThermalScale { bad: usize, total: usize },

    #[error("unknown baseline index `{0}`")]
    UnknownBaseline(String),

    #[error("formula error at offset {offset}: {reason}")]
    Formula { offset: usize, reason: String },

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("duplicate sample for pond `{pond_id}` at {timestamp}")]
    DuplicateSample { pond_id: String, timestamp: String },

    #[error("duplicate pond id `{0}`")]
    DuplicatePond(String),

    #[error("lab parameter `{0}` is constant across the file")]
    ConstantColumn(String),

    #[error("lab parameter `{0}` has no values")]
    EmptyColumn(String),

    #[error("crop contains no valid pixels")]
    EmptyCrop,

    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("sequence too short: need at least {need}, got {got}")]
    TooShort { need: usize, got: usize },

    #[error("sequence is constant")]
    ConstantSeries,

    #[error("no lab parameter column has enough pairs for {0}")]
    NoUsableColumn(String),

    #[error("too few aligned pairs: need {need}, got {got}")]
    TooFewPairs { need: usize, got: usize },

    #[error("invalid search specification: {0}")]
    InvalidSearch(String),

    #[error("no candidate produced a finite MSE")]
    NoFiniteCandidate,

    #[error("unknown pond `{0}`")]
    UnknownPond(String),

    #[error("pond `{0}` has no aligned pairs")]
    EmptyPond(String),

    #[error("method `{method}` has no observations for pond `{pond_id}`")]
    MethodUnavailable { method: String, pond_id: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("PNG encoding failed: {0}")]
    Png(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidValue {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
