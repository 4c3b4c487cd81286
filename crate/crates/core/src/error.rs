use serde::Serialize;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "kebab-case")]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate spectrum: min gap {gap:e} below tolerance {tol:e}")]
    DegenerateSpectrum { gap: f64, tol: f64 },
    #[error("unsupported order {order} (max {max})")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("unsupported size {size} (max {max})")]
    UnsupportedSize { size: usize, max: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("overflow guard: {0}")]
    OverflowGuard(String),
    #[error("no convergence: {message}")]
    NoConvergence { message: String, partial: Vec<f64> },
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),
    #[error("collision abort at t={t} after {halvings} halvings")]
    CollisionAbort { t: f64, halvings: u32, positions: Vec<f64> },
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("edge degenerate: |z| = {modulus} too close to 1")]
    EdgeDegenerate { modulus: f64 },
    #[error("truncation too small: K = {k}, need at least {min}")]
    TruncationTooSmall { k: usize, min: usize },
    #[error("kappa undefined for N = {n}: {reason}")]
    KappaUndefined { n: usize, reason: String },
    #[error("stencil leaves the upper half-plane: {0}")]
    Stencil(String),
    #[error("solver failure: {message}")]
    SolverFailure { message: String, trace: Vec<f64> },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of numerics rather than of caller input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::CollisionAbort { .. }
                | Error::SolverFailure { .. }
                | Error::Numerical(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::DegenerateSpectrum { .. } => "degenerate-spectrum",
            Error::UnsupportedOrder { .. } => "unsupported-order",
            Error::UnsupportedSize { .. } => "unsupported-size",
            Error::Unsupported(_) => "unsupported",
            Error::OverflowGuard(_) => "overflow-guard",
            Error::NoConvergence { .. } => "no-convergence",
            Error::SingularConfiguration(_) => "singular-configuration",
            Error::CollisionAbort { .. } => "collision-abort",
            Error::InsufficientResolution(_) => "insufficient-resolution",
            Error::SingularPoint(_) => "singular-point",
            Error::EdgeDegenerate { .. } => "edge-degenerate",
            Error::TruncationTooSmall { .. } => "truncation-too-small",
            Error::KappaUndefined { .. } => "kappa-undefined",
            Error::Stencil(_) => "stencil",
            Error::SolverFailure { .. } => "solver-failure",
            Error::Numerical(_) => "numerical",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
