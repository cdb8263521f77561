use thiserror::Error;

/// Failure modes shared across the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("initial zone is empty")]
    EmptyZone,

    #[error("eigenvector matrix is ill-conditioned (condition estimate {condition:.3e})")]
    Defective { condition: f64 },

    #[error("matrix exponential failed to converge: {0}")]
    NonConverged(String),

    #[error("state norm {0:.3e} is below the observable threshold")]
    VanishedNorm(f64),

    #[error("state is not a valid sub-normalized amplitude vector (left weight {0})")]
    CorruptState(f64),

    #[error("at least 3 levels are required, got {0}")]
    TooFewLevels(usize),

    #[error("levels must be strictly increasing")]
    NonIncreasingLevels,

    #[error("no realization retained enough levels for gap statistics")]
    NoValidRealizations,

    #[error("curve never crosses its plateau midpoint")]
    NoCrossing,

    #[error("curve variation {spread:.3e} is below twice the pooled standard error {pooled_stderr:.3e}")]
    FlatCurve { spread: f64, pooled_stderr: f64 },

    #[error("curve needs at least {required} samples, got {found}")]
    TooFewSamples { required: usize, found: usize },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable identifier used in output tables and exit diagnostics.
    pub fn tag(&self) -> &'static str {
        match self {
            Self::InvalidConfig(_) => "INVALID_CONFIG",
            Self::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Self::EmptyZone => "EMPTY_ZONE",
            Self::Defective { .. } => "DEFECTIVE",
            Self::NonConverged(_) => "NONCONVERGED",
            Self::VanishedNorm(_) => "VANISHED_NORM",
            Self::CorruptState(_) => "CORRUPT_STATE",
            Self::TooFewLevels(_) => "TOO_FEW_LEVELS",
            Self::NonIncreasingLevels => "NON_INCREASING_LEVELS",
            Self::NoValidRealizations => "NO_VALID_REALIZATIONS",
            Self::NoCrossing => "NO_CROSSING",
            Self::FlatCurve { .. } => "FLAT_CURVE",
            Self::TooFewSamples { .. } => "TOO_FEW_SAMPLES",
            Self::InvalidGrid(_) => "INVALID_GRID",
        }
    }
}
