//! Dense-diagonalization oracle: full spectra, constrained target
//! eigenstates, and error metrics against those references.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::circuit::Statevector;
use crate::engine::{Constraint, ConstraintKind, VqeResult};
use crate::error::{Error, Result};
use crate::pauli::QubitOperator;

/// Eigenvalue gap below which eigenvectors are treated as one degenerate
/// cluster and rotated to a simultaneous constraint eigenbasis.
const DEGENERACY_GAP: f64 = 1e-8;

/// Default tolerance for sector filtering.
pub const SECTOR_TOL: f64 = 1e-6;

/// Full eigendecomposition, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors, one per column, matching `eigenvalues`.
    pub eigenvectors: DMatrix<Complex64>,
    /// Per eigenvector, the expectation of each requested observable.
    pub constraint_expectations: Vec<Vec<f64>>,
}

/// Energy and eigenvector of a reference (exactly diagonalized) state.
#[derive(Debug, Clone)]
pub struct ReferenceState {
    pub energy: f64,
    pub amplitudes: Vec<Complex64>,
}

/// Componentwise |O_variational - O_reference|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableError {
    pub energy_error: f64,
    pub spin_error: f64,
    pub number_error: f64,
}

fn hermitian_matrix(op: &QubitOperator) -> Result<DMatrix<Complex64>> {
    if !op.is_hermitian(1e-10) {
        return Err(Error::NonHermitian {
            max_imag: op.terms().map(|(_, c)| c.im.abs()).fold(0.0, f64::max),
        });
    }
    op.to_matrix()
}

fn sorted_eigen(matrix: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = matrix.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(core::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let dim = eig.eigenvectors.nrows();
    let mut vectors = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (eigenvalues, vectors)
}

/// Full spectrum of a Hermitian operator (dense, up to the matrix limit).
pub fn exact_spectrum(op: &QubitOperator) -> Result<SpectrumResult> {
    exact_spectrum_with_observables(op, &[])
}

/// Full spectrum plus per-eigenvector observable expectations. Degenerate
/// clusters are rotated to a simultaneous eigenbasis of the observables, so
/// the reported expectations do not depend on the eigensolver's arbitrary
/// basis choice inside a cluster.
pub fn exact_spectrum_with_observables(
    op: &QubitOperator,
    observables: &[&QubitOperator],
) -> Result<SpectrumResult> {
    let (eigenvalues, mut vectors) = sorted_eigen(hermitian_matrix(op)?);

    let observable_matrices: Vec<DMatrix<Complex64>> = observables
        .iter()
        .map(|o| {
            if o.n_qubits() != op.n_qubits() {
                return Err(Error::QubitCountMismatch {
                    left: o.n_qubits(),
                    right: op.n_qubits(),
                });
            }
            hermitian_matrix(o)
        })
        .collect::<Result<_>>()?;

    if !observable_matrices.is_empty() {
        for (start, len) in clusters(&eigenvalues) {
            if len > 1 {
                let block = vectors.columns(start, len).into_owned();
                let rotated = rotate_to_simultaneous_basis(block, &observable_matrices);
                vectors.columns_mut(start, len).copy_from(&rotated);
            }
        }
    }

    let constraint_expectations = (0..eigenvalues.len())
        .map(|i| {
            let v = vectors.column(i);
            observable_matrices.iter().map(|m| vector_expectation(&v.into_owned(), m)).collect()
        })
        .collect();

    Ok(SpectrumResult { eigenvalues, eigenvectors: vectors, constraint_expectations })
}

fn clusters(eigenvalues: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] >= DEGENERACY_GAP {
            out.push((start, i - start));
            start = i;
        }
    }
    out
}

/// Within an invariant block, diagonalize each observable in turn, recursing
/// into its own degenerate sub-blocks for the remaining observables.
fn rotate_to_simultaneous_basis(
    block: DMatrix<Complex64>,
    observables: &[DMatrix<Complex64>],
) -> DMatrix<Complex64> {
    let Some((first, rest)) = observables.split_first() else {
        return block;
    };
    if block.ncols() <= 1 {
        return block;
    }
    let restricted = block.adjoint() * first * &block;
    let (values, basis) = sorted_eigen(restricted);
    let mut rotated = &block * basis;
    if !rest.is_empty() {
        for (start, len) in clusters(&values) {
            if len > 1 {
                let sub = rotated.columns(start, len).into_owned();
                let sub_rotated = rotate_to_simultaneous_basis(sub, rest);
                rotated.columns_mut(start, len).copy_from(&sub_rotated);
            }
        }
    }
    rotated
}

fn vector_expectation(v: &DVector<Complex64>, m: &DMatrix<Complex64>) -> f64 {
    let mv = m * v;
    v.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
}

/// Lowest eigenvalue whose eigenvector satisfies every constraint within
/// `tol`, after degenerate clusters are rotated to a simultaneous
/// constraint eigenbasis.
pub fn constrained_ground_state(
    ham: &QubitOperator,
    constraints: &[Constraint],
    tol: f64,
) -> Result<ReferenceState> {
    let observables: Vec<&QubitOperator> = constraints.iter().map(|c| &c.operator).collect();
    let spectrum = exact_spectrum_with_observables(ham, &observables)?;
    for (i, &energy) in spectrum.eigenvalues.iter().enumerate() {
        let satisfied = constraints
            .iter()
            .zip(&spectrum.constraint_expectations[i])
            .all(|(c, &value)| (value - c.target).abs() <= tol);
        if satisfied {
            let amplitudes = spectrum.eigenvectors.column(i).iter().copied().collect();
            return Ok(ReferenceState { energy, amplitudes });
        }
    }
    Err(Error::InfeasibleSector { tol })
}

impl ReferenceState {
    /// Expectation of an operator in the reference eigenvector.
    pub fn expectation(&self, op: &QubitOperator) -> Result<f64> {
        let m = hermitian_matrix(op)?;
        let v = DVector::from_column_slice(&self.amplitudes);
        if v.len() != m.nrows() {
            return Err(Error::QubitCountMismatch { left: m.nrows(), right: v.len() });
        }
        Ok(vector_expectation(&v, &m))
    }
}

/// Absolute errors of a variational result against a reference state, for
/// the energy and the spin / particle-number observables.
pub fn observable_error(
    result: &VqeResult,
    state: &Statevector,
    reference: &ReferenceState,
    spin_op: &QubitOperator,
    number_op: &QubitOperator,
) -> Result<ObservableError> {
    let energy_error = (result.energy - reference.energy).abs();
    let spin_error = (state.expval(spin_op)? - reference.expectation(spin_op)?).abs();
    let number_error = (state.expval(number_op)? - reference.expectation(number_op)?).abs();
    Ok(ObservableError { energy_error, spin_error, number_error })
}

/// Convenience: errors keyed by the constraint kinds present in `constraints`;
/// kinds that are absent report zero error.
pub fn constraint_errors(
    result: &VqeResult,
    constraints: &[Constraint],
    reference: &ReferenceState,
) -> Result<(f64, f64)> {
    let mut spin_error = 0.0;
    let mut number_error = 0.0;
    for (c, &value) in constraints.iter().zip(&result.constraint_values) {
        let reference_value = reference.expectation(&c.operator)?;
        let err = (value - reference_value).abs();
        match c.kind {
            ConstraintKind::TotalSpin => spin_error = err,
            ConstraintKind::ParticleNumber => number_error = err,
            ConstraintKind::Custom => {}
        }
    }
    Ok((spin_error, number_error))
}
