use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown family '{0}'")]
    UnknownFamily(String),
    #[error("family '{family}': missing parameter '{param}'")]
    MissingParameter { family: String, param: String },
    #[error("family '{family}': unexpected parameter '{param}'")]
    UnexpectedParameter { family: String, param: String },
    #[error("family '{family}': parameter out of range: {param} = {value} not in {range}")]
    ParameterOutOfRange {
        family: String,
        param: String,
        value: f64,
        range: String,
    },
    #[error("x = {x} is below the family domain x_min = {x_min}")]
    BelowDomain { x: f64, x_min: f64 },
    #[error("family inadmissible at x = {x}: f(x) = {f} is not > 1")]
    Inadmissible { x: f64, f: f64 },
    #[error("series argument y = {0} outside [0, 1)")]
    SeriesArgument(f64),
    #[error("series argument y = {0} too close to 1 for double precision")]
    SeriesNearUnity(f64),
    #[error("series did not reach tolerance within {terms} terms")]
    SeriesTermCap { terms: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("lambert_w supports z >= 0 only, got {0}")]
    LambertDomain(f64),
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("iteration limit of {0} exceeded")]
    MaxIterations(usize),
    #[error("non-finite value at x = {0}")]
    NonFinite(f64),
    #[error("invalid scan configuration: {0}")]
    InvalidScan(String),
    #[error("family is not certified: no bracket (a, b) was found")]
    NotCertified,
    #[error("family '{family}' is not certified: {reason}")]
    Uncertified { family: String, reason: String },
    #[error("analytic checks failed: {0}")]
    ChecksFailed(String),
    #[error("bracket [{a}, {b}] does not enclose a maximum (g(a) = {g_a}, g(b) = {g_b})")]
    NotAMaximum { a: f64, b: f64, g_a: f64, g_b: f64 },
    #[error("maximizer methods disagree by {spread} (root of g: {by_g}, fixed point: {by_fixed_point}, golden section: {by_golden})")]
    MethodsDisagree {
        spread: f64,
        by_g: f64,
        by_fixed_point: f64,
        by_golden: f64,
    },
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("trial count must be at least 1")]
    NoTrials,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
