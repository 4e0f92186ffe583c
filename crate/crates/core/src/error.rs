use thiserror::Error;

/// Errors raised by the toolkit. Soft mathematical outcomes (suspected
/// non-existence) are reported through result flags, not through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("well eigenvalue parameters must be positive (got {0}, {1})")]
    NonPositiveEigenvalue(f64, f64),
    #[error("coefficient b = {b} makes W vanish inside the working disc of radius {radius}")]
    InvalidCoefficient { b: f64, radius: f64 },
    #[error("two-well parameter k must exceed 1 (got {0})")]
    InvalidK(f64),
    #[error("no well with index {0}")]
    NoSuchWell(usize),
    #[error("Hessian at well is degenerate (smallest eigenvalue {0:e})")]
    DegenerateHessian(f64),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("conformal factor vanishes at interior vertex {index} which is not a declared well")]
    ZeroDensityInterior { index: usize },
    #[error("vector field evaluated at the origin")]
    OriginEvaluation,
    #[error("beta must be nonzero")]
    ZeroBeta,
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("|C1| = {0} exceeds 1")]
    InvalidC1(f64),
    #[error("area {a_tilde} exceeds the existence threshold {threshold}")]
    NonExistence { a_tilde: f64, threshold: f64 },
    #[error("density 1 + bR is not positive along the path")]
    InvalidDensity,
    #[error("area {a_tilde} does not exceed the existence threshold {threshold}")]
    NotInNonexistenceRegime { a_tilde: f64, threshold: f64 },
    #[error("gap {0} is too large for a left-opening parabola to stay in the valid density region")]
    GapTooLarge(f64),
    #[error("solve is flagged as suspected non-existence")]
    NonexistenceSuspected,
    #[error("curve revisits a well at interior vertex {index}")]
    BubbleDetected { index: usize },
    #[error("grid has {0} interior points, at least 16 required")]
    GridTooCoarse(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
