use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("decay envelope validation failed at x = {x}: |g(x)| e^(a|x|) = {observed:e} exceeds C = {bound:e}")]
    EnvelopeViolation { x: f64, observed: f64, bound: f64 },

    #[error("truncation cap of {cap} terms reached; achieved tail bound {achieved:e} > requested {requested:e}")]
    TruncationCap {
        cap: usize,
        achieved: f64,
        requested: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sampling grid mismatch: {0}")]
    SamplingMismatch(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
