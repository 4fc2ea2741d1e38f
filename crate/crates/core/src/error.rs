use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate dynamics: {0}")]
    DegenerateDynamics(String),

    #[error("grid under-resolved: {points_per_fwhm:.1} points per FWHM, need at least {required}")]
    Resolution { points_per_fwhm: f64, required: usize },

    #[error("flat data: no resonance to fit")]
    FlatData,

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("threshold {threshold} not strictly between dark mean {dark_mean} and bright mean {bright_mean}")]
    InvalidThreshold {
        threshold: f64,
        dark_mean: f64,
        bright_mean: f64,
    },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
