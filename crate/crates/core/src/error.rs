use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid constraint: d = {d}, k = {k} (need k > d)")]
    InvalidConstraint { d: usize, k: String },

    #[error("memory {mu} is below the minimum {min} for this constraint")]
    MemoryTooSmall { mu: usize, min: usize },

    #[error("memory {0} exceeds the supported maximum of 8")]
    MemoryTooLarge(usize),

    #[error("word {0} is not a valid constrained word for this diagram")]
    InvalidWord(String),

    #[error("parameter `{name}` = {value} is outside its legal range")]
    ParameterOutOfRange { name: String, value: f64 },

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid shape parameters: {0}")]
    InvalidShapeParameters(String),

    #[error("problem too large for exhaustive evaluation: {0}")]
    TooLarge(String),

    #[error("enumeration budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("no feasible point found (best residual {residual:e})")]
    NoFeasiblePoint { residual: f64 },

    #[error("quadrature did not converge (last relative change {0:e})")]
    QuadratureNotConverged(f64),

    #[error("numerical underflow: {0}")]
    NumericalUnderflow(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
