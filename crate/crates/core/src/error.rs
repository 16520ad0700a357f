use thiserror::Error;

/// Errors raised by model validation, sampling and estimation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("stability index {0} outside (0, 2)")]
    AlphaOutOfRange(f64),
    #[error("dimension {0} not supported (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("invalid density bounds: theta_low={low}, theta_high={high}")]
    InvalidThetaBounds { low: f64, high: f64 },
    #[error("spherical density value {value} outside [{low}, {high}]")]
    ThetaBoundViolated { value: f64, low: f64, high: f64 },
    #[error("alpha = 1 with spherical mean {mean_norm:e} (tolerance {tol:e}): not strictly stable")]
    AlphaOneAsymmetric { mean_norm: f64, tol: f64 },
    #[error("Levy density evaluated at the origin")]
    OriginEvaluation,
    #[error("expected a unit vector, got norm {0}")]
    NotUnitVector(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid spherical density: {0}")]
    InvalidDensity(&'static str),
    #[error("positivity parameter has no closed form at alpha = 1")]
    AlphaEqualsOne,
    #[error("invalid scheme parameters: {0}")]
    InvalidScheme(&'static str),
    #[error("more than {cap} jumps in one step: eps too small for the step length")]
    JumpCapExceeded { cap: u64 },
    #[error("start point lies outside the domain")]
    StartOutsideDomain,
    #[error("invalid domain: {0}")]
    InvalidDomain(&'static str),
    #[error("domain not supported by this estimator: {0}")]
    UnsupportedDomain(&'static str),
    #[error("requested kappa {requested} exceeds achievable {achievable}")]
    KappaTooLarge { requested: f64, achievable: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("regression grid has only {usable} usable points (need 3)")]
    DegenerateGrid { usable: usize },
    #[error("no path survived at the smallest starting radius")]
    AllPathsDied,
    #[error("only {got} surviving paths (need {needed})")]
    TooFewSurvivors { got: u64, needed: u64 },
    #[error("only {got} jump exits in range (need {needed})")]
    TooFewExits { got: u64, needed: u64 },
}

pub type Result<T> = core::result::Result<T, Error>;
