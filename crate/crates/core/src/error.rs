use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain of the operation.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("unsupported polynomial degree {0} (supported: 1..=4)")]
    UnsupportedDegree(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The requested register does not fit the configured qubit or memory budget.
    #[error("capacity exceeded: {needed} qubits requested, limit is {limit}")]
    Capacity { needed: usize, limit: usize },

    /// Post-selection onto the all-zero ancilla outcome has zero probability.
    #[error("post-selection at element {element} has zero probability")]
    ImpossibleBranch { element: usize },

    #[error("expected-cost formula diverges: layer {layer} has success probability 0")]
    DivergentCost { layer: usize },

    #[error("layer {layer} is not parallel: controls overlap on qubit {qubit}")]
    InvalidLayer { layer: usize, qubit: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The closed-form qubit threshold overflowed the representable range.
    #[error("qubit threshold saturated: alpha too close to 1 for the given delta")]
    Saturated,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
