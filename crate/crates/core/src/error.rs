use thiserror::Error;

/// Errors produced by the scallop library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the admissible domain [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid swimmer parameters: {0}")]
    InvalidParams(String),

    #[error("adaptive quadrature on [{a}, {b}] did not reach tolerance within the depth limit")]
    QuadratureNonConvergence { a: f64, b: f64 },

    #[error("control value {u} violates |u| <= {eps}")]
    ConstraintViolation { u: f64, eps: f64 },

    #[error("invalid control profile: {0}")]
    InvalidProfile(String),

    #[error("time {t} is outside the profile horizon [0, {t_final}]")]
    TimeOutOfRange { t: f64, t_final: f64 },

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("k = {k} is too small for the ramp construction: {reason}")]
    KTooSmall { k: u32, reason: String },

    #[error(
        "theta1 = {theta1} <= eps*sqrt(A/B) = {threshold}: the closed-form LQ synthesis does not cover this case"
    )]
    UnhandledLqCase { theta1: f64, threshold: f64 },

    #[error("target displacement {target} is unattainable; one cycle covers [{lo}, {hi}]")]
    Unattainable { target: f64, lo: f64, hi: f64 },

    #[error("net displacement is not strictly monotone in the switching angle near theta1 = {at}")]
    NonMonotone { at: f64 },

    #[error("theta left the admissible domain at t = {t} (theta = {theta})")]
    DomainExit { t: f64, theta: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] CsvError),

    #[error("i/o error: {0}")]
    Io(String),
}

/// Wrapper so that [`Error`] can stay `Clone + PartialEq`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("csv: {0}")]
pub struct CsvError(pub String);

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(CsvError(e.to_string()))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
