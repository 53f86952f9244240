use thiserror::Error;

/// Errors raised by constructions and error evaluations in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("dimension {requested} exceeds the cap of {cap} ({context})")]
    DimensionOverCap {
        requested: u128,
        cap: u128,
        context: &'static str,
    },
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not a contraction (largest singular value {0})")]
    NotContraction(f64),
    #[error("cover not certified: best radius {achieved} above requested {requested}")]
    CoverNotCertified { achieved: f64, requested: f64 },
    #[error("counting prefix of length {prefix} has no qualifying level; extend the counting prefix (needs k = {needed})")]
    ExtendCountingPrefix { prefix: usize, needed: usize },
    #[error("family prefix has no factor for {0}; extend family prefix")]
    ExtendFamilyPrefix(String),
    #[error("rationalization failed: {0}")]
    Rationalization(String),
    #[error("protocol references level {level} but the family only has {available}")]
    ProtocolLevel { level: usize, available: usize },
    #[error("inconsistent family: {0}")]
    Inconsistent(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
