//! Hardware-efficient ansatz and statevector evaluation.
//!
//! The ansatz is D repetitions of (Ry layer, linear CNOT ladder) followed by
//! a final Ry layer, so the parameter count is n_qubits * (D + 1). Parameters
//! are laid out layer-major: params[layer * n_qubits + qubit].
//!
//! Ry(theta) = exp(-i theta Y / 2), so Ry(pi)|0> = |1>.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// trait-based float math for the no_std build; redundant when tests link std
#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::QubitOperator;

/// Layered Ry / CNOT-ladder circuit of a fixed geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ansatz {
    n_qubits: usize,
    depth: usize,
}

impl Ansatz {
    pub fn new(n_qubits: usize, depth: usize) -> Self {
        assert!(n_qubits >= 1, "ansatz needs at least one qubit");
        Ansatz { n_qubits, depth }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn parameter_count(&self) -> usize {
        self.n_qubits * (self.depth + 1)
    }

    /// Prepare |psi(theta)> = V(theta)|0...0>.
    pub fn apply(&self, params: &[f64]) -> Result<Statevector> {
        if params.len() != self.parameter_count() {
            return Err(Error::ParameterCount {
                expected: self.parameter_count(),
                got: params.len(),
            });
        }
        let mut state = Statevector::zero_state(self.n_qubits);
        for layer in 0..=self.depth {
            for q in 0..self.n_qubits {
                state.apply_ry(q, params[layer * self.n_qubits + q]);
            }
            if layer < self.depth {
                for q in 0..self.n_qubits.saturating_sub(1) {
                    state.apply_cnot(q, q + 1);
                }
            }
        }
        Ok(state)
    }
}

/// Dense state of n qubits; amplitude index bit q is qubit q.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn zero_state(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Statevector { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::ParameterCount { expected: 1 << n_qubits, got: amps.len() });
        }
        let state = Statevector { n_qubits, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidConfig(alloc::format!(
                "statevector norm {norm} is not 1"
            )));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn apply_ry(&mut self, qubit: usize, theta: f64) {
        let c = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        let bit = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let j = i | bit;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = c * a - s * b;
                self.amps[j] = s * a + c * b;
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
    }

    /// <psi|P|psi> for a single Pauli word, by basis-state action.
    fn word_expectation(&self, word: &crate::pauli::PauliWord) -> Complex64 {
        let (flip, z_like) = word.masks();
        let y_phase = match word.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, amp) in self.amps.iter().enumerate() {
            let sign = if ((s & z_like).count_ones() & 1) == 1 { -1.0 } else { 1.0 };
            acc += self.amps[s ^ flip].conj() * y_phase * sign * amp;
        }
        acc
    }

    /// Exact expectation value of a Hermitian operator.
    pub fn expval(&self, op: &QubitOperator) -> Result<f64> {
        if op.n_qubits() != self.n_qubits {
            return Err(Error::QubitCountMismatch { left: op.n_qubits(), right: self.n_qubits });
        }
        if !op.is_hermitian(1e-10) {
            return Err(Error::NonHermitian { max_imag: max_imag(op) });
        }
        let mut value = Complex64::new(0.0, 0.0);
        for (word, coeff) in op.terms() {
            value += coeff * self.word_expectation(word);
        }
        if value.im.abs() >= 1e-10 {
            return Err(Error::NonHermitian { max_imag: value.im.abs() });
        }
        Ok(value.re)
    }
}

fn max_imag(op: &QubitOperator) -> f64 {
    op.terms().map(|(_, c)| c.im.abs()).fold(0.0, f64::max)
}

/// Finite-shot estimate of an expectation value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub shots: u64,
    pub seed: u64,
}

/// Estimate <psi|O|psi> by sampling each Pauli term independently in its own
/// eigenbasis: `shots` single-shot +-1 outcomes per term, drawn from the
/// exact outcome distribution. The per-term generator is derived from
/// (seed, term index), so results do not depend on evaluation order.
pub fn sampled_expval(
    state: &Statevector,
    op: &QubitOperator,
    shots: u64,
    seed: u64,
) -> Result<SampledEstimate> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if op.n_qubits() != state.n_qubits() {
        return Err(Error::QubitCountMismatch {
            left: op.n_qubits(),
            right: state.n_qubits(),
        });
    }
    if !op.is_hermitian(1e-10) {
        return Err(Error::NonHermitian { max_imag: max_imag(op) });
    }

    let mut mean = 0.0;
    let mut variance = 0.0;
    for (index, (word, coeff)) in op.terms().enumerate() {
        let c = coeff.re;
        if word.is_identity() {
            mean += c;
            continue;
        }
        let exact = state.word_expectation(word).re.clamp(-1.0, 1.0);
        let p_plus = 0.5 * (1.0 + exact);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let mut plus = 0u64;
        for _ in 0..shots {
            if rng.gen::<f64>() < p_plus {
                plus += 1;
            }
        }
        let sample_mean = (2.0 * plus as f64 - shots as f64) / shots as f64;
        mean += c * sample_mean;
        if shots > 1 {
            // unbiased sample variance of +-1 outcomes, propagated to the mean
            let var = (1.0 - sample_mean * sample_mean) * shots as f64
                / ((shots - 1) as f64)
                / shots as f64;
            variance += c * c * var.max(0.0);
        }
    }
    Ok(SampledEstimate { mean, stderr: variance.sqrt(), shots, seed })
}

/// Analytic gradient by the parameter shift rule, exact for Ry parameters:
/// grad_k = (E(theta + pi/2 e_k) - E(theta - pi/2 e_k)) / 2.
pub fn parameter_shift_grad(
    ansatz: &Ansatz,
    params: &[f64],
    op: &QubitOperator,
) -> Result<Vec<f64>> {
    let mut grad = Vec::with_capacity(params.len());
    let mut shifted = params.to_vec();
    for k in 0..params.len() {
        let original = shifted[k];
        shifted[k] = original + core::f64::consts::FRAC_PI_2;
        let plus = ansatz.apply(&shifted)?.expval(op)?;
        shifted[k] = original - core::f64::consts::FRAC_PI_2;
        let minus = ansatz.apply(&shifted)?.expval(op)?;
        shifted[k] = original;
        grad.push(0.5 * (plus - minus));
    }
    Ok(grad)
}

/// Angles drawn uniformly from [-pi, pi), seeded.
pub fn random_params(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| -core::f64::consts::PI + 2.0 * core::f64::consts::PI * rng.gen::<f64>())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliTerm, PauliWord};
    use alloc::vec;
    use core::f64::consts::PI;

    fn z_op() -> QubitOperator {
        QubitOperator::from_terms(
            1,
            vec![PauliTerm::new(Complex64::new(1.0, 0.0), PauliWord::parse("Z").unwrap())],
        )
        .unwrap()
    }

    #[test]
    fn parameter_counts_match_geometry() {
        assert_eq!(Ansatz::new(2, 3).parameter_count(), 8);
        assert_eq!(Ansatz::new(4, 3).parameter_count(), 16);
        assert_eq!(Ansatz::new(6, 3).parameter_count(), 24);
        assert_eq!(Ansatz::new(4, 2).parameter_count(), 12);
    }

    #[test]
    fn zero_params_prepare_zero_state() {
        let ansatz = Ansatz::new(3, 2);
        let state = ansatz.apply(&vec![0.0; ansatz.parameter_count()]).unwrap();
        assert!((state.amplitudes()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for amp in &state.amplitudes()[1..] {
            assert!(amp.norm() < 1e-15);
        }
    }

    #[test]
    fn ry_pi_flips_qubit() {
        let ansatz = Ansatz::new(1, 0);
        let state = ansatz.apply(&[PI]).unwrap();
        assert!(state.amplitudes()[0].norm() < 1e-15);
        assert!((state.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_params_preserve_norm() {
        let ansatz = Ansatz::new(2, 1);
        let params = random_params(ansatz.parameter_count(), 7);
        let state = ansatz.apply(&params).unwrap();
        assert!((state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_parameter_count_errors() {
        let ansatz = Ansatz::new(2, 1);
        assert!(matches!(
            ansatz.apply(&[0.0]),
            Err(Error::ParameterCount { expected: 4, got: 1 })
        ));
    }

    #[test]
    fn expval_basics() {
        let zero = Statevector::zero_state(1);
        assert!((zero.expval(&z_op()).unwrap() - 1.0).abs() < 1e-15);

        // |+> via Ry(pi/2)
        let plus = Ansatz::new(1, 0).apply(&[PI / 2.0]).unwrap();
        assert!(plus.expval(&z_op()).unwrap().abs() < 1e-15);

        let identity = QubitOperator::identity(1);
        assert!((plus.expval(&identity).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expval_rejects_non_hermitian() {
        let op = QubitOperator::from_terms(
            1,
            vec![PauliTerm::new(Complex64::new(0.0, 1.0), PauliWord::parse("X").unwrap())],
        )
        .unwrap();
        assert!(Statevector::zero_state(1).expval(&op).is_err());
    }

    #[test]
    fn sampling_identity_is_exact() {
        let state = Statevector::zero_state(2);
        let est = sampled_expval(&state, &QubitOperator::identity(2), 16, 1).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn sampling_eigenstate_has_zero_stderr() {
        let state = Statevector::zero_state(1);
        let est = sampled_expval(&state, &z_op(), 1_000_000, 42).unwrap();
        assert!((est.mean - 1.0).abs() < 5e-3);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn sampling_plus_state_stderr_scale() {
        // maximally uncertain Z outcome: stderr ~ 1/sqrt(shots)
        let plus = Ansatz::new(1, 0).apply(&[PI / 2.0]).unwrap();
        let est = sampled_expval(&plus, &z_op(), 1024, 7).unwrap();
        let expected = 1.0 / 1024f64.sqrt();
        assert!((est.stderr - expected).abs() <= 0.2 * expected, "stderr {}", est.stderr);
    }

    #[test]
    fn sampling_is_deterministic_in_seed() {
        let plus = Ansatz::new(1, 0).apply(&[PI / 2.0]).unwrap();
        let a = sampled_expval(&plus, &z_op(), 1024, 9).unwrap();
        let b = sampled_expval(&plus, &z_op(), 1024, 9).unwrap();
        assert_eq!(a, b);
        let c = sampled_expval(&plus, &z_op(), 1024, 10).unwrap();
        assert!(a.mean != c.mean || a.stderr != c.stderr);
    }

    #[test]
    fn gradient_of_single_ry() {
        let ansatz = Ansatz::new(1, 0);
        // E(theta) = cos(theta) for op = Z
        let grad0 = parameter_shift_grad(&ansatz, &[0.0], &z_op()).unwrap();
        assert!(grad0[0].abs() < 1e-15);
        let grad = parameter_shift_grad(&ansatz, &[PI / 2.0], &z_op()).unwrap();
        assert!((grad[0] + 1.0).abs() < 1e-12);
    }
}
