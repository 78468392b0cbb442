use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("party {party}: {what} index {value} out of range (limit {limit})")]
    IndexOutOfRange {
        party: usize,
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("scenario too large for enumeration: {count} strategies exceeds cap {cap}")]
    EnumerationCap { count: u128, cap: u64 },

    #[error("degenerate functional: {0}")]
    DegenerateFunctional(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("empty net: sampler produced no points within budget {budget}")]
    EmptyNet { budget: usize },

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),

    #[error("catalog verification failed for `{name}`: expected {expected:?}, enumerated {actual:?}")]
    CatalogMismatch {
        name: String,
        expected: (f64, f64),
        actual: (f64, f64),
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
