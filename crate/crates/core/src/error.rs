use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("density must be non-negative and finite, got {0}")]
    NegativeDensity(f64),

    #[error("invalid window: half_side {half_side}, guard_margin {guard_margin}")]
    InvalidWindow { half_side: f64, guard_margin: f64 },

    #[error("insufficient points: needed {needed}, have {available}")]
    InsufficientPoints { needed: usize, available: usize },

    #[error("target coincides with origin; bearing is undefined")]
    DegenerateDirection,

    #[error("unbounded gain is singular at r = 0")]
    Singularity,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not reach tolerance (estimate {estimate}, error {error_estimate})")]
    ToleranceNotMet { estimate: f64, error_estimate: f64 },

    #[error("Stirling number S({n}, {k}) overflows u64")]
    StirlingOverflow { n: u32, k: u32 },

    #[error("no interior nodes were observed in any trial; enlarge the window or the density")]
    DegenerateWindow,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite value in output column `{column}`")]
    NonFiniteOutput { column: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
