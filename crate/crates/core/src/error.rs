use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("pauli word length mismatch: {left} vs {right}")]
    WordLengthMismatch { left: usize, right: usize },

    #[error("operator qubit counts differ: {left} vs {right}")]
    QubitCountMismatch { left: usize, right: usize },

    #[error("{n_qubits} qubits exceed the dense-matrix limit of {limit}")]
    CapacityExceeded { n_qubits: usize, limit: usize },

    #[error("operator is not Hermitian (max imaginary coefficient {max_imag:e})")]
    NonHermitian { max_imag: f64 },

    #[error("FCIDUMP parse error at line {line}: {message}")]
    FcidumpParse { line: usize, message: String },

    #[error("orbital index {index} out of range for {n_spatial} orbitals")]
    OrbitalIndexOutOfRange { index: usize, n_spatial: usize },

    #[error("integral symmetry violated: {message}")]
    IntegralSymmetry { message: String },

    #[error("operator acts with {letter} on removable qubit {qubit}; the assumed parity symmetry does not hold")]
    SymmetryViolation { qubit: usize, letter: char },

    #[error("two-qubit reduction needs an even qubit count >= 4, got {n_qubits}")]
    ReductionShape { n_qubits: usize },

    #[error("parameter vector has length {got}, ansatz expects {expected}")]
    ParameterCount { expected: usize, got: usize },

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("constraint list and multiplier list differ in length: {constraints} vs {multipliers}")]
    MultiplierCount { constraints: usize, multipliers: usize },

    #[error("non-finite objective value during optimization")]
    NonFiniteObjective { last_good_params: Vec<f64>, last_good_value: f64 },

    #[error("single-parameter scan is not sinusoidal (fit residual {residual:e})")]
    SinusoidFit { residual: f64 },

    #[error("no eigenstate satisfies the constraints within tolerance {tol:e}")]
    InfeasibleSector { tol: f64 },

    #[error("ground state already satisfies the constraint; the multiplier bound is degenerate")]
    DegenerateConstraintBound,

    #[error("penalty step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
