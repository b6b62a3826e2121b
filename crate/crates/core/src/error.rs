use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("overcompleteness {q} with n = {n} does not give an even integer grid size")]
    Grid { q: String, n: usize },

    #[error("perturbation {value:e} at frequency index {index} exceeds the half-bin bound {bound:e}")]
    PerturbationOutOfBounds { index: usize, value: f64, bound: f64 },

    #[error("the DC perturbation is fixed at zero")]
    DcPerturbation,

    #[error("index {index} out of range (expected < {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reference signal has zero energy")]
    ZeroReference,

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Grid { .. } | Error::InvalidParameter(_)
        )
    }
}
