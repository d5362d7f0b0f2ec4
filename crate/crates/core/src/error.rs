use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("staircase shape violated in column {column}: {reason}")]
    Shape { column: usize, reason: String },
    #[error("pole: lower parameter reaches {0} before the series terminates")]
    Pole(String),
    #[error("identity fails at power {power}: {detail}")]
    IdentityFailure { power: usize, detail: String },
    #[error("singular point: quadratic factor {0:e} within tolerance")]
    Singularity(f64),
    #[error("inconsistent Catalan limit at coefficient {index}")]
    InconsistentG2 { index: usize },
    #[error("point outside the q-disc: |q| = {0}")]
    Domain(f64),
    #[error("iteration did not converge: coefficient {index} moved by {delta:e}")]
    NonConvergence { index: usize, delta: f64 },
    #[error("non-finite sample at grid indices ({0}, {1})")]
    NonFiniteSample(usize, usize),
    #[error("NaN in scenario input: {0}")]
    NanInput(String),
    #[error("no threshold: limit bound {limit} is not below target {target}")]
    NoThreshold { limit: f64, target: f64 },
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("2-adic routes disagree: agreement {agree} bits, required {required}")]
    RouteDisagreement { agree: i64, required: i64 },
    #[error("insufficient precision: have {have} bits, need {need}")]
    InsufficientPrecision { have: i64, need: i64 },
    #[error("denominator type violated at index {0}")]
    TypeViolation(usize),
    #[error("Dirichlet search failed for Q = {0}")]
    SearchFailure(u64),
    #[error("g is not monotone on [{lo}, {hi}]")]
    Onset { lo: f64, hi: f64 },
    #[error("no feasible grid point")]
    InfeasibleEverywhere,
}

pub type Result<T> = std::result::Result<T, Error>;
