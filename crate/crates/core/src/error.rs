use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown curve family `{0}`")]
    UnknownFamily(String),

    #[error("invalid curve parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("duplicate consecutive sample at index {0}")]
    DuplicatePoint(usize),

    #[error("cumulative arc length is not monotone near segment {0}")]
    NonMonotoneArcLength(usize),

    #[error("curve is not embedded (bi-Lipschitz ratio {ratio:.3e})")]
    NotEmbedded { ratio: f64 },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("kernel argument must be positive, got {0}")]
    NonPositiveArgument(f64),

    #[error("tail integral of 1/phi diverges: {0}")]
    DivergentTail(String),

    #[error("negative-weight condition fails: {0}")]
    NegativeWeight(String),

    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),

    #[error("coincident points: conformal angle undefined")]
    CoincidentPoints,

    #[error("invalid pair geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid Moebius map: {0}")]
    InvalidMap(String),

    #[error("point maps to infinity under inversion centred at {0:?}")]
    PointAtInfinity(Vec<f64>),

    #[error("inversion centre too close to curve: distance {distance:.3e} < {threshold:.3e}")]
    IllConditioned { distance: f64, threshold: f64 },

    #[error("minimization failed: {0}")]
    Minimize(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category used by the command-line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::UnknownFamily(_)
            | Error::InvalidParameters(_)
            | Error::InvalidCurve(_)
            | Error::DuplicatePoint(_)
            | Error::NonMonotoneArcLength(_)
            | Error::NotEmbedded { .. } => "curve",
            Error::InvalidKernel(_)
            | Error::NonPositiveArgument(_)
            | Error::DivergentTail(_)
            | Error::NegativeWeight(_) => "kernel",
            Error::InvalidQuadrature(_) => "quadrature",
            Error::CoincidentPoints | Error::InvalidGeometry(_) => "geometry",
            Error::InvalidMap(_) | Error::PointAtInfinity(_) | Error::IllConditioned { .. } => {
                "mobius"
            }
            Error::Minimize(_) => "minimize",
            Error::Parse(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
