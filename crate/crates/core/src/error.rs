use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("system has no allowed pattern on the requested window")]
    EmptySystem,

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("constraints cannot be recoded to nearest-neighbour form: {0}")]
    NotRecodable(String),

    #[error("unsupported window: {0}")]
    UnsupportedWindow(String),

    #[error("{what}: size {size} exceeds cap {cap}; use a sampling estimator or a smaller instance")]
    CapExceeded { what: String, size: f64, cap: f64 },

    #[error("separation scale {eps} must exceed twice the metric tail {tail}")]
    MarginViolation { eps: f64, tail: f64 },

    #[error("point not covered by any cover member: {0}")]
    NotCovered(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn cap(what: impl Into<String>, size: f64, cap: f64) -> Self {
        Error::CapExceeded {
            what: what.into(),
            size,
            cap,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
