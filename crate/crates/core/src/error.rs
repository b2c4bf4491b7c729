use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch in {context}: expected {expected}, got {got}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("arm {arm} out of range 1..={num_arms}")]
    ArmOutOfRange { arm: usize, num_arms: usize },

    #[error("unit count {count} is not divisible by {divisor}")]
    NotDivisible { count: usize, divisor: usize },

    #[error("covariate index {index} out of range for dimension {dim}")]
    CovariateIndex { index: usize, dim: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("cannot pair an odd number of points ({0})")]
    OddPointCount(usize),

    #[error("exact matching refused for {0} points (limit 14)")]
    ExactMatchTooLarge(usize),

    #[error("arm {arm} has no observed outcomes")]
    EmptyArm { arm: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid contrast: {0}")]
    InvalidContrast(String),

    #[error("stratum {stratum}, arm {arm}: only {count} observations (need at least 2)")]
    CellTooSmall {
        stratum: usize,
        arm: usize,
        count: usize,
    },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("rank deficient matrix: {0}")]
    RankDeficient(String),

    #[error(
        "re-randomization failed after {redraws} redraws; tightest criterion: {criterion}"
    )]
    RedrawLimit { redraws: usize, criterion: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric domain error: {0}")]
    Domain(String),

    #[error("structural violation: {0}")]
    Structure(String),

    #[error("csv row {row}: {message}")]
    CsvParse { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
