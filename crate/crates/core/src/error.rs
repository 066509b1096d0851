use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} elements, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("malformed assignment: {0}")]
    MalformedAssignment(String),

    #[error("element {element} is already assigned label {label}")]
    ElementAssigned { element: usize, label: u8 },

    #[error("invalid oracle specification: {0}")]
    InvalidSpec(String),

    #[error("enumeration guard exceeded: {what} needs {required} points, limit is {limit}")]
    GuardExceeded {
        what: String,
        required: String,
        limit: u64,
    },

    #[error("rejection budget exhausted after {attempts} attempts (seed {seed})")]
    RejectionBudget { seed: u64, attempts: usize },

    #[error("rule {rule} is incompatible with k = {k}: {reason}")]
    IncompatibleRule {
        rule: String,
        k: usize,
        reason: String,
    },

    #[error("epsilon {eps} is infeasible for k = {k} (residuals {residuals:?})")]
    InfeasibleEpsilon {
        k: usize,
        eps: f64,
        residuals: [f64; 3],
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from the enumeration guard rather than bad input.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::GuardExceeded { .. })
    }
}
