use thiserror::Error;

/// Every failure the laboratory can report.
///
/// Values carried in variants are converted to `f64` so the error type does not
/// depend on the scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension too small: N = {0}, need N >= 2")]
    DimensionTooSmall(usize),
    #[error("weight-order violation: s = {s} > t = {t}")]
    WeightOrder { s: f64, t: f64 },
    #[error("weight-integrability violation: weight exponent {weight} must be < N = {n}")]
    WeightIntegrability { weight: f64, n: usize },
    #[error("power violation: {0}")]
    Power(String),
    #[error("alpha must be positive, got {0}")]
    NonpositiveAlpha(f64),
    #[error("profile radii must be strictly increasing (node {index})")]
    NonMonotoneRadii { index: usize },
    #[error("profile radius must be positive (node {index}, r = {radius})")]
    NonpositiveRadius { index: usize, radius: f64 },
    #[error("profile needs at least one node")]
    EmptyProfile,
    #[error("invalid profile parameters: {0}")]
    InvalidProfile(String),
    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("argument must be nonnegative, got {0}")]
    NegativeArgument(f64),
    #[error("quadrature did not reach rel. tol. {rel_tol} within depth {max_depth} on [{lo}, {hi}]")]
    NonConvergentRefinement { rel_tol: f64, max_depth: usize, lo: f64, hi: f64 },
    #[error("zero denominator in {0} ratio")]
    ZeroDenominator(&'static str),
    #[error("invalid beta {beta}: need 0 <= beta < N = {n}")]
    InvalidBeta { beta: f64, n: usize },
    #[error("supercritical configuration: alpha = {alpha} >= alpha_crit = {alpha_crit}")]
    Supercritical { alpha: f64, alpha_crit: f64 },
    #[error("finiteness violation: b = {b} > N = {n}, the supremum is infinite")]
    Finiteness { b: f64, n: usize },
    #[error("exponent fit degenerate: only {0} usable points")]
    FitDegenerate(usize),
    #[error("point at the origin is not allowed")]
    Origin,
    #[error("dilation factor must be positive, got {0}")]
    NonpositiveLambda(f64),
    #[error("inadmissible log profile: {0}")]
    InadmissibleLogProfile(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config parse error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by invalid user input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::NonConvergentRefinement { .. } | Error::FitDegenerate(_) | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
