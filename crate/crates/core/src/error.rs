//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("unphysical variance {0} (shot-noise variance must be >= 1)")]
    UnphysicalVariance(f64),

    #[error("matrix is not symmetric (max deviation {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix dimension {0} is not a positive even number")]
    BadDimension(usize),

    #[error("mode index {index} out of range for {modes} modes")]
    ModeIndexOutOfRange { index: usize, modes: usize },

    #[error("duplicate mode index {0}")]
    DuplicateModeIndex(usize),

    #[error("empty mode selection")]
    EmptyModeSelection,

    #[error("no remaining modes after measurement")]
    NoRemainingModes,

    #[error("measured block is degenerate and cannot be inverted")]
    DegenerateMeasurement,

    #[error("invalid detection weights: {0}")]
    InvalidWeights(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("individual-attack pathway requires pure loss (excess noise must be 0)")]
    RequiresPureLoss,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid mode grouping: {0}")]
    InvalidGrouping(String),

    #[error("degenerate parameter fit: {0}")]
    DegenerateFit(String),

    #[error("empty series")]
    EmptySeries,

    #[error("parameter out of domain: {0}")]
    OutOfDomain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
