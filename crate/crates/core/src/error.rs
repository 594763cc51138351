use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("singular Hardy weight: {0}")]
    Singularity(String),

    #[error("wrong regime: {0}")]
    Regime(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("numerical instability at t = {time}: {reason}")]
    Instability { time: f64, reason: String },

    #[error("no convergence after {iterations} iterations (last objective {last_value:e})")]
    IterationLimit {
        iterations: usize,
        last_value: f64,
        /// Last iterate, kept so the caller can restart or inspect it.
        last_iterate: Option<Box<crate::spectral::SpectralField>>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by inputs (as opposed to numerical failure).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::Grid(_)
                | Error::Singularity(_)
                | Error::Regime(_)
                | Error::Config(_)
                | Error::Domain(_)
                | Error::Format(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
