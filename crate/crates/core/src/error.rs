use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid para-particle specification: {0}")]
    InvalidSpec(String),

    #[error("level index {n} out of range 1..={max}")]
    LevelOutOfRange { n: usize, max: usize },

    #[error("qubit index {index} out of range for a {width}-qubit register")]
    QubitOutOfRange { index: usize, width: usize },

    #[error("register of {qubits} qubits exceeds the dense limit of {limit}")]
    TooManyQubits { qubits: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("commutator [{left}, {right}] is not ±2i times a single basis element or zero")]
    NotInSpan { left: String, right: String },

    #[error("unsupported Pauli string shape: {0}")]
    UnsupportedString(String),

    #[error("factorization did not converge: best residual {best_residual:e} > tolerance {tol:e}")]
    NotConverged { best_residual: f64, tol: f64 },

    #[error("confusion matrix for qubit {qubit} is singular (eps01 + eps10 >= 1)")]
    SingularConfusion { qubit: usize },

    #[error("invalid noise parameter {name} = {value}")]
    InvalidNoise { name: String, value: f64 },

    #[error("no shots available for estimation")]
    EmptyShotSet,

    #[error("Mandel Q is undefined when the mean number is zero")]
    UndefinedMandelQ,

    #[error("need at least {needed} {what}, got {got}")]
    Insufficient {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
