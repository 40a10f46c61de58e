//! VQE, CVQE, and the sequence-of-penalties schedule.
//!
//! CVQE minimizes F(theta) = <H> + sum_i mu_i (<A_i> - a_i)^2. SPVQE repeats
//! that minimization N_s times with mu_k = mu_max * k / N_s, warm-starting
//! each step from the previous optimum, and returns the step with the best
//! cost; its energy is reported as E = F - P.
//!
//! Optimization always runs on exact expectation values. Finite-shot
//! estimation enters through `final_remeasure`, which re-estimates the
//! energy alone at the chosen parameters so the reported uncertainty is
//! sigma_F rather than sqrt(sigma_F^2 + sigma_P^2).

use alloc::string::ToString;
use alloc::vec::Vec;
use alloc::{format, vec};



use crate::circuit::{parameter_shift_grad, sampled_expval, Ansatz, SampledEstimate, Statevector};
use crate::error::{Error, Result};
use crate::optimize::{
    cg_minimize, nft_minimize, ComponentValues, Method, OptimizationTrace, OptimizerConfig,
    PenaltyStructure,
};
use crate::pauli::QubitOperator;

/// What a constraint observable measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    TotalSpin,
    ParticleNumber,
    Custom,
}

/// Hermitian observable pinned to a target eigenvalue.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub operator: QubitOperator,
    pub target: f64,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn total_spin(operator: QubitOperator, target: f64) -> Self {
        Constraint { operator, target, kind: ConstraintKind::TotalSpin }
    }

    pub fn particle_number(operator: QubitOperator, target: f64) -> Self {
        Constraint { operator, target, kind: ConstraintKind::ParticleNumber }
    }
}

/// Linear multiplier ramp: mu_k = mu_max * k / n_steps for k = 1..n_steps,
/// so the final step uses exactly mu_max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySchedule {
    pub mu_max: f64,
    pub n_steps: usize,
}

impl PenaltySchedule {
    pub fn new(mu_max: f64, n_steps: usize) -> Result<Self> {
        if !(mu_max >= 0.0) {
            return Err(Error::InvalidConfig(format!("mu_max {mu_max} must be >= 0")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidConfig("n_steps must be >= 1".to_string()));
        }
        Ok(PenaltySchedule { mu_max, n_steps })
    }

    pub fn step_size(&self) -> f64 {
        self.mu_max / self.n_steps as f64
    }

    pub fn multiplier_at(&self, k: usize) -> f64 {
        debug_assert!(k >= 1 && k <= self.n_steps);
        self.mu_max * k as f64 / self.n_steps as f64
    }
}

/// Cost decomposition at one state: cost = energy + penalty, penalty >= 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    pub cost: f64,
    pub energy: f64,
    pub penalty: f64,
    pub constraint_values: Vec<f64>,
}

/// F, E, P and the raw constraint expectations at a prepared state.
pub fn penalized_cost(
    ham: &QubitOperator,
    constraints: &[Constraint],
    mus: &[f64],
    state: &Statevector,
) -> Result<CostBreakdown> {
    if constraints.len() != mus.len() {
        return Err(Error::MultiplierCount {
            constraints: constraints.len(),
            multipliers: mus.len(),
        });
    }
    for mu in mus {
        if !(*mu >= 0.0) {
            return Err(Error::InvalidConfig(format!("multiplier {mu} must be >= 0")));
        }
    }
    let energy = state.expval(ham)?;
    let mut penalty = 0.0;
    let mut constraint_values = Vec::with_capacity(constraints.len());
    for (constraint, mu) in constraints.iter().zip(mus) {
        let value = state.expval(&constraint.operator)?;
        let residual = value - constraint.target;
        penalty += mu * residual * residual;
        constraint_values.push(value);
    }
    Ok(CostBreakdown { cost: energy + penalty, energy, penalty, constraint_values })
}

/// Outcome of a single (possibly penalized) variational minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct VqeResult {
    pub params: Vec<f64>,
    pub energy: f64,
    pub cost: f64,
    pub penalty: f64,
    pub constraint_values: Vec<f64>,
    pub trace: OptimizationTrace,
}

/// One entry of the penalty sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SpvqeStep {
    /// 1-based schedule index k.
    pub step: usize,
    pub multiplier: f64,
    pub start_params: Vec<f64>,
    pub result: VqeResult,
}

/// Full penalty-sequence outcome.
///
/// Steps are compared under the final cost function: every step's optimum is
/// re-scored with the full multiplier mu_max before taking the minimum
/// (earliest step on ties). Comparing each step under its own multiplier
/// would systematically select the weakest-penalty step, since a smaller mu
/// can only lower the cost. `best` carries the re-scored cost and penalty;
/// its energy is E = F - P as measured at that step's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SpvqeResult {
    pub steps: Vec<SpvqeStep>,
    pub best_step: usize,
    pub best: VqeResult,
}

/// Failure inside the schedule, with the completed steps attached.
#[derive(Debug)]
pub struct SpvqeError {
    pub step: usize,
    pub completed: Vec<SpvqeStep>,
    pub source: Error,
}

impl From<SpvqeError> for Error {
    fn from(e: SpvqeError) -> Error {
        Error::StepFailed { step: e.step, source: alloc::boxed::Box::new(e.source) }
    }
}

fn validate_problem(
    ham: &QubitOperator,
    constraints: &[Constraint],
    ansatz: &Ansatz,
    x0: &[f64],
) -> Result<()> {
    if ansatz.n_qubits() != ham.n_qubits() {
        return Err(Error::QubitCountMismatch {
            left: ansatz.n_qubits(),
            right: ham.n_qubits(),
        });
    }
    if x0.len() != ansatz.parameter_count() {
        return Err(Error::ParameterCount { expected: ansatz.parameter_count(), got: x0.len() });
    }
    if !ham.is_hermitian(1e-10) {
        return Err(Error::NonHermitian { max_imag: 0.0 });
    }
    for c in constraints {
        if c.operator.n_qubits() != ham.n_qubits() {
            return Err(Error::QubitCountMismatch {
                left: c.operator.n_qubits(),
                right: ham.n_qubits(),
            });
        }
        if !c.operator.is_hermitian(1e-10) {
            return Err(Error::NonHermitian { max_imag: 0.0 });
        }
    }
    Ok(())
}

/// Evaluates energy and active-constraint expectations from one state
/// preparation per parameter vector.
struct Evaluator<'a> {
    ham: &'a QubitOperator,
    ansatz: &'a Ansatz,
    constraints: Vec<&'a Constraint>,
    multipliers: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    /// Keep only constraints with a nonzero multiplier, so a zero-penalty
    /// run is bit-identical to plain VQE, evaluation counts included.
    fn new(ham: &'a QubitOperator, ansatz: &'a Ansatz, pairs: &'a [Constraint], mus: &[f64]) -> Self {
        let mut constraints = Vec::new();
        let mut multipliers = Vec::new();
        for (c, &mu) in pairs.iter().zip(mus) {
            if mu != 0.0 {
                constraints.push(c);
                multipliers.push(mu);
            }
        }
        Evaluator { ham, ansatz, constraints, multipliers }
    }

    fn components(&self, params: &[f64]) -> ComponentValues {
        let state = self.ansatz.apply(params).expect("validated parameter count");
        let energy = state.expval(self.ham).expect("validated Hermitian operator");
        let constraints = self
            .constraints
            .iter()
            .map(|c| state.expval(&c.operator).expect("validated Hermitian operator"))
            .collect();
        ComponentValues { energy, constraints }
    }

    fn structure(&self) -> PenaltyStructure {
        PenaltyStructure {
            multipliers: self.multipliers.clone(),
            targets: self.constraints.iter().map(|c| c.target).collect(),
        }
    }

    fn cost(&self, params: &[f64]) -> f64 {
        self.structure().cost(&self.components(params))
    }

    /// d F / d theta_k = dE/dk + sum_i 2 mu_i (A_i - a_i) dA_i/dk, with all
    /// component gradients from the parameter shift rule.
    fn cost_gradient(&self, params: &[f64]) -> Vec<f64> {
        let mut grad = parameter_shift_grad(self.ansatz, params, self.ham)
            .expect("validated operators");
        if self.constraints.is_empty() {
            return grad;
        }
        let center = self.components(params);
        for (i, c) in self.constraints.iter().enumerate() {
            let residual = center.constraints[i] - c.target;
            let cgrad = parameter_shift_grad(self.ansatz, params, &c.operator)
                .expect("validated operators");
            let scale = 2.0 * self.multipliers[i] * residual;
            for (g, cg) in grad.iter_mut().zip(&cgrad) {
                *g += scale * cg;
            }
        }
        grad
    }

    /// Evaluation cost of one gradient call, in state preparations.
    fn gradient_cost(&self, n_params: usize) -> usize {
        let shifts = 2 * n_params * (1 + self.constraints.len());
        if self.constraints.is_empty() {
            shifts
        } else {
            shifts + 1
        }
    }
}

fn run_optimizer(evaluator: &Evaluator<'_>, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizationTrace> {
    match cfg.method {
        Method::Cg => {
            let mut cfg = *cfg;
            cfg.gradient_cost = evaluator.gradient_cost(x0.len());
            cg_minimize(
                |p| evaluator.cost(p),
                |p| evaluator.cost_gradient(p),
                x0,
                &cfg,
            )
        }
        Method::Nft => {
            nft_minimize(|p| evaluator.components(p), &evaluator.structure(), x0, cfg)
        }
    }
}

fn characterize(
    ham: &QubitOperator,
    constraints: &[Constraint],
    mus: &[f64],
    ansatz: &Ansatz,
    trace: OptimizationTrace,
) -> Result<VqeResult> {
    let state = ansatz.apply(&trace.best_params)?;
    let breakdown = penalized_cost(ham, constraints, mus, &state)?;
    Ok(VqeResult {
        params: trace.best_params.clone(),
        energy: breakdown.energy,
        cost: breakdown.cost,
        penalty: breakdown.penalty,
        constraint_values: breakdown.constraint_values,
        trace,
    })
}

/// Plain VQE: minimize the energy alone.
pub fn vqe_run(
    ham: &QubitOperator,
    ansatz: &Ansatz,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<VqeResult> {
    cvqe_run(ham, &[], &[], ansatz, x0, cfg)
}

/// Constrained VQE at fixed multipliers.
pub fn cvqe_run(
    ham: &QubitOperator,
    constraints: &[Constraint],
    mus: &[f64],
    ansatz: &Ansatz,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<VqeResult> {
    if constraints.len() != mus.len() {
        return Err(Error::MultiplierCount {
            constraints: constraints.len(),
            multipliers: mus.len(),
        });
    }
    validate_problem(ham, constraints, ansatz, x0)?;
    let evaluator = Evaluator::new(ham, ansatz, constraints, mus);
    let trace = run_optimizer(&evaluator, x0, cfg)?;
    characterize(ham, constraints, mus, ansatz, trace)
}

/// Sequence-of-penalties run: N_s constrained minimizations with a linearly
/// increasing multiplier, each warm-started from the previous optimum.
pub fn spvqe_run(
    ham: &QubitOperator,
    constraints: &[Constraint],
    schedule: &PenaltySchedule,
    ansatz: &Ansatz,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> core::result::Result<SpvqeResult, SpvqeError> {
    let mut steps: Vec<SpvqeStep> = Vec::with_capacity(schedule.n_steps);
    let mut start = x0.to_vec();

    for k in 1..=schedule.n_steps {
        let mu = schedule.multiplier_at(k);
        let mus = vec![mu; constraints.len()];
        match cvqe_run(ham, constraints, &mus, ansatz, &start, cfg) {
            Ok(result) => {
                let next = result.params.clone();
                steps.push(SpvqeStep { step: k, multiplier: mu, start_params: start, result });
                start = next;
            }
            Err(source) => {
                return Err(SpvqeError { step: k, completed: steps, source });
            }
        }
    }

    // re-score every step under the final multiplier before comparing
    let final_mu = schedule.mu_max;
    let rescored: Vec<(f64, f64)> = steps
        .iter()
        .map(|s| {
            let penalty = penalty_from_values(constraints, final_mu, &s.result.constraint_values);
            (s.result.energy + penalty, penalty)
        })
        .collect();
    let best_step = (0..steps.len())
        .min_by(|&a, &b| {
            rescored[a].0.partial_cmp(&rescored[b].0).unwrap_or(core::cmp::Ordering::Equal)
        })
        .expect("schedule has at least one step");

    let mut best = steps[best_step].result.clone();
    best.cost = rescored[best_step].0;
    best.penalty = rescored[best_step].1;
    Ok(SpvqeResult { steps, best_step, best })
}

fn penalty_from_values(constraints: &[Constraint], mu: f64, values: &[f64]) -> f64 {
    let mut penalty = 0.0;
    for (constraint, value) in constraints.iter().zip(values) {
        let residual = value - constraint.target;
        penalty += mu * residual * residual;
    }
    penalty
}

/// The multiplier lower bound (E_gs - E_target) / (<A>_gs - a)^2, kept in
/// the stated sign convention: it is only binding when positive, and callers
/// should warn when their mu_max falls below max(0, bound).
pub fn mu_max_lower_bound(
    e_gs: f64,
    e_target: f64,
    a_gs_expval: f64,
    a_target: f64,
) -> Result<f64> {
    let residual = a_gs_expval - a_target;
    if residual == 0.0 {
        return Err(Error::DegenerateConstraintBound);
    }
    Ok((e_gs - e_target) / (residual * residual))
}

/// Re-estimate the energy alone at the chosen parameters. With `shots` = 0
/// the estimate is analytic (mean = exact expectation, stderr = 0).
pub fn final_remeasure(
    ham: &QubitOperator,
    ansatz: &Ansatz,
    best_params: &[f64],
    shots: u64,
    seed: u64,
) -> Result<SampledEstimate> {
    let state = ansatz.apply(best_params)?;
    if shots == 0 {
        let mean = state.expval(ham)?;
        return Ok(SampledEstimate { mean, stderr: 0.0, shots: 0, seed });
    }
    sampled_expval(&state, ham, shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliTerm, PauliWord};
    use alloc::vec;
    use num_complex::Complex64;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn single(n: usize, s: &str, c: f64) -> QubitOperator {
        QubitOperator::from_terms(n, vec![PauliTerm::new(re(c), PauliWord::parse(s).unwrap())])
            .unwrap()
    }

    #[test]
    fn schedule_hits_mu_max_exactly() {
        let s = PenaltySchedule::new(2.5, 10).unwrap();
        assert_eq!(s.multiplier_at(10), 2.5);
        assert!((s.multiplier_at(4) - 1.0).abs() < 1e-15);
        assert!((s.step_size() - 0.25).abs() < 1e-15);
        assert!(PenaltySchedule::new(-1.0, 10).is_err());
        assert!(PenaltySchedule::new(1.0, 0).is_err());
    }

    #[test]
    fn penalized_cost_arithmetic() {
        // <A> - a = 0.5, mu = 4, E = -1 -> F = 0
        let ham = single(1, "Z", -1.0); // E(|0>) = -1
        let constraint = Constraint {
            operator: single(1, "I", 1.0),
            target: 0.5,
            kind: ConstraintKind::Custom,
        };
        let state = Statevector::zero_state(1);
        let b = penalized_cost(&ham, &[constraint], &[4.0], &state).unwrap();
        assert!((b.energy + 1.0).abs() < 1e-15);
        assert!((b.penalty - 1.0).abs() < 1e-15);
        assert!(b.cost.abs() < 1e-15);
    }

    #[test]
    fn penalty_vanishes_for_zero_mu() {
        let ham = single(1, "Z", 1.0);
        let c = Constraint {
            operator: single(1, "Z", 1.0),
            target: -1.0,
            kind: ConstraintKind::Custom,
        };
        let state = Statevector::zero_state(1);
        let b = penalized_cost(&ham, &[c], &[0.0], &state).unwrap();
        assert_eq!(b.cost, b.energy);
        assert_eq!(b.penalty, 0.0);
    }

    #[test]
    fn vqe_flips_single_qubit() {
        // E(theta) = cos(theta): ground state |1> at theta = +-pi, energy -1
        let ham = single(1, "Z", 1.0);
        let ansatz = Ansatz::new(1, 0);
        let cfg = OptimizerConfig::cg(100, 1e-12);
        let result = vqe_run(&ham, &ansatz, &[0.3], &cfg).unwrap();
        assert!((result.energy + 1.0).abs() < 1e-8, "energy {}", result.energy);
        assert!((result.params[0].abs() - core::f64::consts::PI).abs() < 1e-4);
        assert_eq!(result.penalty, 0.0);
    }

    #[test]
    fn vqe_on_scalar_hamiltonian() {
        let ham = QubitOperator::scalar(1, re(0.75));
        let ansatz = Ansatz::new(1, 0);
        let cfg = OptimizerConfig::nft(1);
        let result = vqe_run(&ham, &ansatz, &[1.1], &cfg).unwrap();
        assert!((result.energy - 0.75).abs() < 1e-12);
    }

    #[test]
    fn cvqe_zero_mus_matches_vqe_bitwise() {
        let ham = single(2, "ZZ", -0.7).plus(&single(2, "XI", 0.3)).unwrap();
        let ansatz = Ansatz::new(2, 1);
        let x0 = crate::circuit::random_params(ansatz.parameter_count(), 5);
        let constraint = Constraint {
            operator: single(2, "ZI", 1.0),
            target: 1.0,
            kind: ConstraintKind::Custom,
        };
        for cfg in [OptimizerConfig::cg(40, 1e-10), OptimizerConfig::nft(4)] {
            let plain = vqe_run(&ham, &ansatz, &x0, &cfg).unwrap();
            let penalized =
                cvqe_run(&ham, core::slice::from_ref(&constraint), &[0.0], &ansatz, &x0, &cfg)
                    .unwrap();
            assert_eq!(plain.params, penalized.params);
            assert_eq!(plain.trace.history, penalized.trace.history);
            assert_eq!(plain.trace.evaluations, penalized.trace.evaluations);
        }
    }

    #[test]
    fn spvqe_single_step_equals_cvqe() {
        let ham = single(2, "ZI", 1.0).plus(&single(2, "XX", 0.4)).unwrap();
        let ansatz = Ansatz::new(2, 1);
        let x0 = crate::circuit::random_params(ansatz.parameter_count(), 11);
        let constraint = Constraint {
            operator: single(2, "ZZ", 1.0),
            target: 1.0,
            kind: ConstraintKind::Custom,
        };
        let cfg = OptimizerConfig::nft(3);
        let schedule = PenaltySchedule::new(2.0, 1).unwrap();
        let seq = spvqe_run(&ham, core::slice::from_ref(&constraint), &schedule, &ansatz, &x0, &cfg)
            .unwrap();
        let flat =
            cvqe_run(&ham, core::slice::from_ref(&constraint), &[2.0], &ansatz, &x0, &cfg).unwrap();
        assert_eq!(seq.steps.len(), 1);
        assert_eq!(seq.best, flat);
    }

    #[test]
    fn spvqe_warm_start_chain() {
        let ham = single(1, "Z", 1.0);
        let ansatz = Ansatz::new(1, 0);
        let constraint = Constraint {
            operator: single(1, "Z", 1.0),
            target: 1.0,
            kind: ConstraintKind::Custom,
        };
        let schedule = PenaltySchedule::new(1.0, 4).unwrap();
        let cfg = OptimizerConfig::nft(2);
        let seq = spvqe_run(&ham, core::slice::from_ref(&constraint), &schedule, &ansatz, &[0.4], &cfg)
            .unwrap();
        assert_eq!(seq.steps.len(), 4);
        for pair in seq.steps.windows(2) {
            assert_eq!(pair[1].start_params, pair[0].result.params);
        }
        assert_eq!(seq.steps[0].start_params, vec![0.4]);
        // mu_k = k/4
        for (i, s) in seq.steps.iter().enumerate() {
            assert!((s.multiplier - (i as f64 + 1.0) / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mu_bound_arithmetic() {
        let b = mu_max_lower_bound(-2.0, -1.0, 0.0, 2.0).unwrap();
        assert!((b + 0.25).abs() < 1e-15);
        let b = mu_max_lower_bound(-1.0, -2.0, 0.0, 1.0).unwrap();
        assert!((b - 1.0).abs() < 1e-15);
        assert!(matches!(
            mu_max_lower_bound(-1.0, -2.0, 1.0, 1.0),
            Err(Error::DegenerateConstraintBound)
        ));
    }

    #[test]
    fn final_remeasure_exact_mode() {
        let ham = single(1, "Z", -0.6);
        let ansatz = Ansatz::new(1, 0);
        let est = final_remeasure(&ham, &ansatz, &[0.9], 0, 3).unwrap();
        let state = ansatz.apply(&[0.9]).unwrap();
        assert_eq!(est.mean, state.expval(&ham).unwrap());
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn remeasured_energy_matches_cost_when_penalty_vanishes() {
        // at a constraint-satisfying optimum F = E, so the fresh estimate of
        // E agrees with F up to sampling error
        let ham = single(1, "Z", 1.0);
        let constraint = Constraint {
            operator: single(1, "Z", 1.0),
            target: -1.0,
            kind: ConstraintKind::Custom,
        };
        let ansatz = Ansatz::new(1, 0);
        let cfg = OptimizerConfig::nft(3);
        let result =
            cvqe_run(&ham, core::slice::from_ref(&constraint), &[2.0], &ansatz, &[0.4], &cfg)
                .unwrap();
        assert!(result.penalty < 1e-12);
        let est = final_remeasure(&ham, &ansatz, &result.params, 1024, 11).unwrap();
        assert!((est.mean - result.cost).abs() <= 5.0 * est.stderr + 1e-9);
    }
}
