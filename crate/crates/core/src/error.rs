use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator size mismatch: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("at most 64 qubits are supported, got {0}")]
    TooManyQubits(usize),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("unsupported code/method combination: {0}")]
    Unsupported(String),
    #[error("invalid fault location {0}")]
    InvalidFaultLocation(usize),
    #[error("subset ({s}, {t}) out of range for n_s = {n_s}, n_t = {n_t}")]
    SubsetOutOfRange { s: usize, t: usize, n_s: usize, n_t: usize },
    #[error("lookup table collision at syndrome {syndrome}: {existing} vs {candidate}")]
    TableCollision {
        syndrome: String,
        existing: String,
        candidate: String,
    },
    #[error("error-correction protocol: {0}")]
    Protocol(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
