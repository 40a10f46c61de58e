//! Per-point problem assembly: FCIDUMP -> mapped Hamiltonian, number and
//! spin observables, constraints, and the oracle reference.

use anyhow::{anyhow, bail, Context, Result};
use spvqe_core::{
    build_hamiltonian, constrained_ground_state, jordan_wigner, number_operator, parity_map,
    parse_fcidump, total_spin_operator, two_qubit_reduction, Constraint, FermionIntegrals,
    QubitOperator, ReductionSector, ReferenceState,
};

use crate::config::{ConstraintSpec, MappingChoice};

/// Mapped operators and reference data for one geometry point.
pub struct Problem {
    pub hamiltonian: QubitOperator,
    pub number: QubitOperator,
    pub spin: QubitOperator,
    pub constraints: Vec<Constraint>,
    pub reference: ReferenceState,
    pub n_qubits: usize,
}

/// Reduction sector: from the particle-number constraint target when one is
/// present, otherwise from the FCIDUMP header. The Sz projection keeps the
/// header value when its parity fits the electron count, else drops to
/// N mod 2.
fn reduction_sector(ints: &FermionIntegrals, constraints: &[ConstraintSpec]) -> Result<ReductionSector> {
    let target_n = constraints
        .iter()
        .find(|c| c.label == "particle_number")
        .map(|c| {
            let rounded = c.target.round();
            if (c.target - rounded).abs() > 1e-9 || rounded < 0.0 {
                bail!("particle-number target {} is not a non-negative integer", c.target)
            } else {
                Ok(rounded as usize)
            }
        })
        .transpose()?
        .unwrap_or(ints.n_electrons);
    let ms2 = if (ints.ms2.unsigned_abs() as usize) % 2 == target_n % 2 {
        ints.ms2
    } else {
        (target_n % 2) as i32
    };
    ReductionSector::from_target(target_n, ms2).map_err(|e| anyhow!(e.to_string()))
}

pub fn build_problem(
    text: &str,
    mapping: MappingChoice,
    constraint_specs: &[ConstraintSpec],
    oracle_tol: f64,
) -> Result<Problem> {
    let ints = parse_fcidump(text).context("parsing FCIDUMP")?;
    ints.validate(1e-10).context("validating integral symmetries")?;

    let fermionic_ham = build_hamiltonian(&ints).context("building Hamiltonian")?;
    let fermionic_number = number_operator(ints.n_modes());
    let fermionic_spin = total_spin_operator(ints.n_spatial());

    let (hamiltonian, number, spin) = match mapping {
        MappingChoice::JordanWigner => (
            jordan_wigner(&fermionic_ham),
            jordan_wigner(&fermionic_number),
            jordan_wigner(&fermionic_spin),
        ),
        MappingChoice::Parity => (
            parity_map(&fermionic_ham),
            parity_map(&fermionic_number),
            parity_map(&fermionic_spin),
        ),
        MappingChoice::ParityReduced => {
            let sector = reduction_sector(&ints, constraint_specs)?;
            let reduce = |op: &QubitOperator| {
                two_qubit_reduction(op, sector).map_err(|e| anyhow!(e.to_string()))
            };
            (
                reduce(&parity_map(&fermionic_ham))?,
                reduce(&parity_map(&fermionic_number))?,
                reduce(&parity_map(&fermionic_spin))?,
            )
        }
    };

    let constraints: Vec<Constraint> = constraint_specs
        .iter()
        .map(|spec| match spec.label.as_str() {
            "total_spin" => Ok(Constraint::total_spin(spin.clone(), spec.target)),
            "particle_number" => Ok(Constraint::particle_number(number.clone(), spec.target)),
            other => Err(anyhow!("unknown constraint label '{other}'")),
        })
        .collect::<Result<_>>()?;

    let reference = constrained_ground_state(&hamiltonian, &constraints, oracle_tol)
        .map_err(|e| anyhow!("oracle reference: {e}"))?;

    let n_qubits = hamiltonian.n_qubits();
    Ok(Problem { hamiltonian, number, spin, constraints, reference, n_qubits })
}
