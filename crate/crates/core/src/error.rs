use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("degree overflow: {0} + {1} exceeds ambient dimension {2}")]
    DegreeOverflow(usize, usize, usize),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("operation needs a form of positive degree")]
    DegreeZero,
    #[error("invalid form: {0}")]
    InvalidForm(String),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("unknown convention `{0}`")]
    UnknownConvention(String),
    #[error("bracket is not in sp(6): |AJ + JA^t| = {0:.3e}")]
    NotSymplectic(f64),
    #[error("bracket must be nonzero")]
    ZeroBracket,
    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("sp(6) drift {drift:.3e} exceeds tolerance at t = {t}")]
    SpDrift { t: f64, drift: f64 },
    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),
    #[error("outside the domain of the self-similar solution: 1 - 2ct = {0}")]
    SelfSimilarDomain(f64),
    #[error("point lies on a coordinate axis")]
    OnAxis,
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
