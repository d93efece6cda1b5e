use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Adaptive quadrature ran out of subdivisions. The best estimate is kept
    /// so callers can decide whether it is good enough.
    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:.6e}, error {error:.3e}, requested {requested:.3e})")]
    NonConvergence {
        estimate: f64,
        error: f64,
        requested: f64,
        subdivisions: usize,
    },

    #[error("extrapolation to zero failed: {0}")]
    Extrapolation(String),

    #[error("spectral tail not resolved: {0}")]
    SpectralTail(String),

    #[error("evaluation overflow at {0}")]
    Overflow(String),

    #[error("unsupported kernel combination: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("numerical check failed: {0}")]
    Check(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
