use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("wire {wire} out of range for {qubits} qubits")]
    WireOutOfRange { wire: usize, qubits: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("{qubits} qubits exceeds the cap of {cap}")]
    TooManyQubits { qubits: usize, cap: usize },

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("invalid bitstring: {0}")]
    InvalidBits(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty hamiltonian")]
    EmptyHamiltonian,

    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("qhe error: {0}")]
    Qhe(#[from] crate::blind::QheError),

    #[error("config error: {0}")]
    Config(String),
}
