use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis index {index} out of range for {nq} qubits")]
    IndexOutOfRange { index: usize, nq: usize },

    #[error("qubit {qubit} out of range 1..={nq}")]
    QubitOutOfRange { qubit: usize, nq: usize },

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("invalid bit value {0}; expected 0 or 1")]
    InvalidBit(u8),

    #[error("qubit count must be positive")]
    ZeroQubits,

    #[error("amplitude array of length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),

    #[error("gate of arity {gate} applied to {targets} target qubit(s)")]
    ArityMismatch { gate: usize, targets: usize },

    #[error("matrix has {got} entries, expected {expected}")]
    BadMatrixSize { got: usize, expected: usize },

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid Pauli component {0}; expected 0..=3")]
    InvalidPauli(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace {0} differs from 1")]
    InvalidTrace(f64),

    #[error("negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("invalid ensemble weights: {0}")]
    InvalidWeights(String),

    #[error("invalid qubit subset: {0}")]
    InvalidSubset(String),

    #[error("invalid noise model: {0}")]
    InvalidNoiseModel(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("state is outside the correctable subspace (residual weight {0:e})")]
    Uncorrectable(f64),

    #[error("numerical invariant violated: {0}")]
    InvariantViolation(String),

    #[error("eigenvalue solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
