use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("kernel singularity: {0}")]
    Singularity(&'static str),

    /// The closed form degenerates when |Im σ| is a small fraction of |σ|.
    #[error("closed form undefined near the real axis: |Im σ|/|σ| = {ratio:e} <= {threshold:e}")]
    NearRealAxis { ratio: f64, threshold: f64 },

    #[error("point is not on the boundary: Re q1 - |q'|^2 = {defect:e}")]
    OffBoundary { defect: f64 },

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("input: {0}")]
    Input(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("search failed: {0}")]
    Search(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
