use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: value {value}, estimated error {error}")]
    QuadratureNotConverged { value: f64, error: f64 },

    #[error("interval has zero probability")]
    ZeroInterval,

    #[error("slope is not finite")]
    NonFiniteSlope,

    #[error("sum law unsupported: {0}")]
    UnsupportedConvolution(String),

    #[error("tilt normalizer diverges for lambda = {lambda}")]
    DivergentNormalizer { lambda: f64 },

    #[error("distribution is unbounded below")]
    UnboundedBelow,

    #[error("distribution is unbounded above")]
    UnboundedAbove,

    #[error("conditioning window has zero probability (mass {mass})")]
    EmptyWindow { mass: f64 },

    #[error("joint laws must go through the dependent conditioning entry point")]
    UnsupportedDependence,

    #[error("conditional bath returned {value} at x = {x}, outside [0, 1]")]
    NonFiniteConditional { x: f64, value: f64 },

    #[error("only {accepted} of {samples} draws accepted; enlarge the sample budget or the window")]
    TooFewAccepted { accepted: u64, samples: u64 },

    #[error("laws are not defined on a common grid")]
    GridMismatch,

    #[error("moment generating function diverges at lambda = {lambda} (finite on ({lower}, {upper}))")]
    DivergentMgf { lambda: f64, lower: f64, upper: f64 },

    #[error("y = {y} lies outside the interior of the rate function domain")]
    BoundarySupremum { y: f64 },

    #[error("window contains the mean {mean}")]
    MeanInsideWindow { mean: f64 },

    #[error("constraint mean {alpha} is outside the support hull ({lower}, {upper})")]
    InfeasibleMean { alpha: f64, lower: f64, upper: f64 },

    #[error("experiment hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("non-positive value {value} at position {index} cannot enter a log-log fit")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("root finder failed: {0}")]
    RootNotFound(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
