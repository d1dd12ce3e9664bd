use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("band {band} outside the usable range 0..={n_max}")]
    BandOutOfRange { band: i64, n_max: usize },
    #[error("grid specifications do not match")]
    SpecMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("function is not band-limited: out-of-band energy fraction {0:e}")]
    NotBandLimited(f64),
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("invalid leaf: {0}")]
    InvalidLeaf(String),
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("malformed grid file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
