use thiserror::Error;

/// Errors raised by the lab's numerical and configuration layers.
#[derive(Debug, Error)]
pub enum LabError {
    /// A dyadic level finer than the grid supports was requested.
    #[error("resolution error: level {requested} exceeds grid exponent {available}")]
    Resolution { requested: u32, available: u32 },

    /// A requested scale lies below the grid spacing.
    #[error("below resolution: t = {t} is smaller than the grid spacing {floor}")]
    BelowResolution { t: f64, floor: f64 },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("size error: {len} coefficients exceed the exact-enumeration limit of {max}")]
    Size { len: usize, max: usize },

    #[error("data error: {0}")]
    Data(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

impl LabError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        LabError::Parameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        LabError::Configuration(msg.into())
    }
}
