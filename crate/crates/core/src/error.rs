//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectral grid: {0}")]
    InvalidGrid(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("wavelength ranges do not overlap (source {source:?} nm, target {target:?} nm)")]
    NonOverlappingRanges {
        source: (f64, f64),
        target: (f64, f64),
    },

    #[error("correlated color temperature {0} K outside supported range {1}..={2} K")]
    CctOutOfRange(f64, f64, f64),

    #[error("degenerate color value: {0}")]
    DegenerateColor(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("spectral grid mismatch: {0}")]
    GridMismatch(String),

    #[error("rank-deficient patch matrix: {0}")]
    RankDeficient(String),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("invalid checker: {0}")]
    InvalidChecker(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("no spectral recovery matrix available for {0} input")]
    MissingRecovery(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("schema violation in {context}: {message}")]
    Schema { context: String, message: String },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("no paired scenes for cameras {0} -> {1}")]
    NoPairedScenes(String, String),

    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(String),

    #[error("malformed image file: {0}")]
    MalformedImage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error points at user input (data, config, CLI arguments)
    /// rather than an internal invariant failure.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::NonFiniteGradient(_))
    }
}
