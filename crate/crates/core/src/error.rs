use thiserror::Error;

/// Errors produced by the detectors, noise models and analysis tools.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("need at least {min} gray-levels, got {got}")]
    TooFewColors { min: usize, got: usize },

    #[error("gray-level {color} out of range for {num_colors} colors")]
    ColorOutOfRange { color: usize, num_colors: usize },

    #[error("noise sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),

    #[error("mixture weight must lie in [0, 1], got {0}")]
    InvalidWeight(f64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("noise matrix column {column} sums to {sum}, not 1")]
    NotColumnStochastic { column: usize, sum: f64 },

    #[error("noise matrix is numerically singular (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("observation has zero probability under every hypothesis")]
    ZeroEvidence,

    #[error("observation has zero probability at pixel ({x}, {y})")]
    ZeroEvidenceAt { x: usize, y: usize },

    #[error("window size must be an odd positive integer, got {0}")]
    InvalidWindowSize(usize),

    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    ImageTooSmall {
        width: usize,
        height: usize,
        window: usize,
    },

    #[error("invalid image geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("joint probability {joint} exceeds evidence {evidence} in domain {domain}")]
    JointExceedsEvidence {
        domain: String,
        joint: f64,
        evidence: f64,
    },

    #[error("enumeration needs {needed} terms, above the guard of {guard}")]
    GuardExceeded { needed: u128, guard: u128 },

    #[error("truth mask has a single class among defined pixels")]
    SingleClassTruth,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
