//! Statevector VQE with penalty-constrained variants.
//!
//! The crate builds molecular qubit Hamiltonians from FCIDUMP integrals,
//! simulates a hardware-efficient Ry/CNOT ansatz exactly (optionally with
//! finite-shot sampling), and minimizes plain or penalized costs with a
//! conjugate-gradient or sequential sinusoidal-fit optimizer. A dense
//! exact-diagonalization module provides reference spectra and constrained
//! target states for error reporting.
//!
//! The crate is `no_std` (alloc required); IO, file formats and the CLI live
//! in the companion `spvqe-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod circuit;
pub mod engine;
pub mod error;
pub mod fermion;
pub mod optimize;
pub mod pauli;
pub mod reference;

pub use circuit::{parameter_shift_grad, random_params, sampled_expval, Ansatz, SampledEstimate, Statevector};
pub use engine::{
    cvqe_run, final_remeasure, mu_max_lower_bound, penalized_cost, spvqe_run, vqe_run, Constraint,
    ConstraintKind, CostBreakdown, PenaltySchedule, SpvqeError, SpvqeResult, SpvqeStep, VqeResult,
};
pub use error::{Error, Result};
pub use fermion::{
    build_hamiltonian, jordan_wigner, number_operator, parity_map, parse_fcidump,
    total_spin_operator, two_qubit_reduction, FermionIntegrals, FermionOperator, Parity,
    ReductionSector,
};
pub use optimize::{
    cg_minimize, fit_sinusoid, nft_minimize, ComponentValues, Method, OptimizationTrace,
    OptimizerConfig, PenaltyStructure, Sinusoid,
};
pub use pauli::{pauli_mul, Pauli, PauliTerm, PauliWord, QubitOperator};
pub use reference::{
    constrained_ground_state, constraint_errors, exact_spectrum,
    exact_spectrum_with_observables, observable_error, ObservableError, ReferenceState,
    SpectrumResult,
};
