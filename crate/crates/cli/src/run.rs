//! Scan execution: per-record runs, sweeps over schedule lengths, and
//! paired robustness studies.

use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;
use spvqe_core::{
    cvqe_run, final_remeasure, random_params, spvqe_run, vqe_run, Ansatz, OptimizerConfig,
    PenaltySchedule, VqeResult,
};

use crate::config::{derive_seed, BudgetMode, MethodChoice, ScanConfig};
use crate::problem::{build_problem, Problem};

pub const ORACLE_TOL: f64 = 1e-6;

/// One CSV row of a scan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Record {
    pub label: String,
    pub bond_length_angstrom: f64,
    pub method: &'static str,
    pub repeat: usize,
    pub seed: u64,
    pub energy_hartree: f64,
    pub cost: f64,
    pub penalty: f64,
    pub spin_expval: f64,
    pub number_expval: f64,
    pub energy_error: f64,
    pub spin_error: f64,
    pub number_error: f64,
    pub evaluations: usize,
    pub ns: usize,
    pub mu_max: f64,
    pub shots: u64,
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// One schedule step of an SPVQE record, for the per-step output stream.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StepRecord {
    pub label: String,
    pub repeat: usize,
    pub seed: u64,
    pub step: usize,
    pub multiplier: f64,
    pub cost: f64,
    pub energy: f64,
    pub penalty: f64,
    /// Constraint expectations at the step optimum, semicolon separated.
    pub constraint_values: String,
    pub evaluations: usize,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Failure {
    pub label: String,
    pub method: &'static str,
    pub repeat: usize,
    pub message: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PointReference {
    pub label: String,
    pub bond_length_angstrom: f64,
    pub energy: f64,
    pub spin_expval: f64,
    pub number_expval: f64,
}

#[derive(Debug, Default, serde::Serialize)]
pub struct ScanReport {
    pub records: Vec<Record>,
    pub step_records: Vec<StepRecord>,
    pub failures: Vec<Failure>,
    pub references: Vec<PointReference>,
}

impl ScanReport {
    fn merge(&mut self, other: ScanReport) {
        self.records.extend(other.records);
        self.step_records.extend(other.step_records);
        self.failures.extend(other.failures);
        for reference in other.references {
            if !self.references.iter().any(|r| r.label == reference.label) {
                self.references.push(reference);
            }
        }
    }
}

struct WorkItem {
    point_index: usize,
    repeat: usize,
    method: MethodChoice,
    seed: u64,
    ns: usize,
    mu_max: f64,
    optimizer: OptimizerConfig,
}

fn run_item(
    config: &ScanConfig,
    problem: &Problem,
    item: &WorkItem,
) -> Result<(Record, Vec<StepRecord>)> {
    let point = &config.points[item.point_index];
    let ansatz = Ansatz::new(problem.n_qubits, config.depth);
    let x0 = random_params(ansatz.parameter_count(), item.seed);
    let started = Instant::now();

    let mus: Vec<f64> = vec![item.mu_max; problem.constraints.len()];
    let mut step_records = Vec::new();
    let (result, evaluations): (VqeResult, usize) = match item.method {
        MethodChoice::Vqe => {
            let r = vqe_run(&problem.hamiltonian, &ansatz, &x0, &item.optimizer)?;
            let evals = r.trace.evaluations;
            (r, evals)
        }
        MethodChoice::Cvqe => {
            let r = cvqe_run(
                &problem.hamiltonian,
                &problem.constraints,
                &mus,
                &ansatz,
                &x0,
                &item.optimizer,
            )?;
            let evals = r.trace.evaluations;
            (r, evals)
        }
        MethodChoice::Spvqe => {
            let schedule = PenaltySchedule::new(item.mu_max, item.ns)
                .map_err(|e| anyhow!(e.to_string()))?;
            let seq = spvqe_run(
                &problem.hamiltonian,
                &problem.constraints,
                &schedule,
                &ansatz,
                &x0,
                &item.optimizer,
            )
            .map_err(|e| anyhow!("step {}: {}", e.step, e.source))?;
            for s in &seq.steps {
                step_records.push(StepRecord {
                    label: point.label.clone(),
                    repeat: item.repeat,
                    seed: item.seed,
                    step: s.step,
                    multiplier: s.multiplier,
                    cost: s.result.cost,
                    energy: s.result.energy,
                    penalty: s.result.penalty,
                    constraint_values: s
                        .result
                        .constraint_values
                        .iter()
                        .map(|v| format!("{v:.12e}"))
                        .collect::<Vec<_>>()
                        .join(";"),
                    evaluations: s.result.trace.evaluations,
                });
            }
            let evals = seq.steps.iter().map(|s| s.result.trace.evaluations).sum();
            (seq.best, evals)
        }
    };

    // reported energy: exact decomposition E = F - P, or a fresh finite-shot
    // estimate of <H> alone when sampling is requested
    let energy = if config.shots == 0 {
        result.energy
    } else {
        final_remeasure(&problem.hamiltonian, &ansatz, &result.params, config.shots, item.seed)?
            .mean
    };

    let state = ansatz.apply(&result.params)?;
    let spin_expval = state.expval(&problem.spin)?;
    let number_expval = state.expval(&problem.number)?;
    let reference = &problem.reference;
    let reference_spin = reference.expectation(&problem.spin)?;
    let reference_number = reference.expectation(&problem.number)?;

    let record = Record {
        label: point.label.clone(),
        bond_length_angstrom: point.bond_length_angstrom,
        method: item.method.as_str(),
        repeat: item.repeat,
        seed: item.seed,
        energy_hartree: energy,
        cost: result.cost,
        penalty: result.penalty,
        spin_expval,
        number_expval,
        energy_error: (energy - reference.energy).abs(),
        spin_error: (spin_expval - reference_spin).abs(),
        number_error: (number_expval - reference_number).abs(),
        evaluations,
        ns: item.ns,
        mu_max: item.mu_max,
        shots: config.shots,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    Ok((record, step_records))
}

/// The multiplier inequality only binds when positive; warn when the
/// configured mu_max sits below it.
fn warn_below_mu_bound(config: &ScanConfig, problem: &Problem, label: &str) {
    if config.method == MethodChoice::Vqe || problem.constraints.is_empty() {
        return;
    }
    let Ok(spectrum) = spvqe_core::exact_spectrum(&problem.hamiltonian) else {
        return;
    };
    let ground_energy = spectrum.eigenvalues[0];
    let ground: Vec<_> = spectrum.eigenvectors.column(0).iter().copied().collect();
    let ground_state = spvqe_core::ReferenceState { energy: ground_energy, amplitudes: ground };
    for constraint in &problem.constraints {
        let Ok(a_gs) = ground_state.expectation(&constraint.operator) else {
            continue;
        };
        match spvqe_core::mu_max_lower_bound(
            ground_energy,
            problem.reference.energy,
            a_gs,
            constraint.target,
        ) {
            Ok(bound) if config.schedule.mu_max < bound.max(0.0) => {
                eprintln!(
                    "warning: point '{label}': mu_max {} is below the lower bound {bound:.3e}",
                    config.schedule.mu_max
                );
            }
            _ => {}
        }
    }
}

fn optimizer_for(config: &ScanConfig, method: MethodChoice, ns: usize) -> OptimizerConfig {
    match (method, config.budget_mode) {
        (MethodChoice::Spvqe, BudgetMode::Total) => config.optimizer.divided(ns).to_core(),
        _ => config.optimizer.to_core(),
    }
}

/// Run every (point, repeat) cell of the configured scan with the
/// configured method.
pub fn run_scan(config: &ScanConfig) -> Result<ScanReport> {
    run_methods(config, &[config.method], config.schedule.n_steps)
}

fn run_methods(config: &ScanConfig, methods: &[MethodChoice], ns: usize) -> Result<ScanReport> {
    config.validate()?;
    let mut report = ScanReport::default();

    for (point_index, point) in config.points.iter().enumerate() {
        // a failing point is recorded and the scan moves on
        let problem = match std::fs::read_to_string(&point.fcidump)
            .with_context(|| format!("reading {}", point.fcidump.display()))
            .and_then(|text| {
                build_problem(&text, config.mapping, &config.constraints, ORACLE_TOL)
                    .with_context(|| format!("building problem for point '{}'", point.label))
            }) {
            Ok(problem) => problem,
            Err(e) => {
                report.failures.push(Failure {
                    label: point.label.clone(),
                    method: "setup",
                    repeat: 0,
                    message: format!("{e:#}"),
                });
                continue;
            }
        };
        warn_below_mu_bound(config, &problem, &point.label);

        report.references.push(PointReference {
            label: point.label.clone(),
            bond_length_angstrom: point.bond_length_angstrom,
            energy: problem.reference.energy,
            spin_expval: problem.reference.expectation(&problem.spin)
                .map_err(|e| anyhow!(e.to_string()))?,
            number_expval: problem.reference.expectation(&problem.number)
                .map_err(|e| anyhow!(e.to_string()))?,
        });

        let items: Vec<WorkItem> = methods
            .iter()
            .flat_map(|&method| {
                (0..config.repeats).map(move |repeat| WorkItem {
                    point_index,
                    repeat,
                    method,
                    seed: derive_seed(config.master_seed, point_index, repeat, method.id()),
                    ns: if method == MethodChoice::Spvqe { ns } else { 1 },
                    mu_max: if method == MethodChoice::Vqe { 0.0 } else { config.schedule.mu_max },
                    optimizer: optimizer_for(config, method, ns),
                })
            })
            .collect();

        let outcomes: Vec<(usize, Result<(Record, Vec<StepRecord>)>)> = items
            .par_iter()
            .enumerate()
            .map(|(i, item)| (i, run_item(config, &problem, item)))
            .collect();

        for (i, outcome) in outcomes {
            match outcome {
                Ok((record, steps)) => {
                    report.records.push(record);
                    report.step_records.extend(steps);
                }
                Err(e) => report.failures.push(Failure {
                    label: point.label.clone(),
                    method: items[i].method.as_str(),
                    repeat: items[i].repeat,
                    message: format!("{e:#}"),
                }),
            }
        }
    }
    Ok(report)
}

/// One full scan per schedule length; records carry the `ns` they ran with.
pub fn steps_sweep(config: &ScanConfig, ns_values: &[usize]) -> Result<ScanReport> {
    let mut report = ScanReport::default();
    for &ns in ns_values {
        let mut sub = config.clone();
        sub.method = MethodChoice::Spvqe;
        sub.schedule.n_steps = ns;
        report.merge(run_methods(&sub, &[MethodChoice::Spvqe], ns)?);
    }
    Ok(report)
}

/// Paired CVQE / SPVQE runs over `n_starts` seeded random starts with the
/// total optimizer budget shared across the SPVQE steps.
pub fn robustness_study(config: &ScanConfig, n_starts: usize) -> Result<ScanReport> {
    if n_starts < 2 {
        anyhow::bail!("robustness study needs at least 2 starts");
    }
    let mut sub = config.clone();
    sub.repeats = n_starts;
    sub.budget_mode = BudgetMode::Total;
    run_methods(&sub, &[MethodChoice::Cvqe, MethodChoice::Spvqe], config.schedule.n_steps)
}

/// Mean errors grouped by a key column.
pub fn mean_errors_by<K, F>(records: &[Record], key: F) -> Vec<(K, f64, f64, f64)>
where
    K: PartialEq + Clone,
    F: Fn(&Record) -> K,
{
    let mut groups: Vec<(K, Vec<&Record>)> = Vec::new();
    for record in records {
        let k = key(record);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, members)) => members.push(record),
            None => groups.push((k, vec![record])),
        }
    }
    groups
        .into_iter()
        .map(|(k, members)| {
            let n = members.len() as f64;
            let mean = |f: fn(&Record) -> f64| members.iter().map(|r| f(r)).sum::<f64>() / n;
            (
                k,
                mean(|r| r.energy_error),
                mean(|r| r.spin_error),
                mean(|r| r.number_error),
            )
        })
        .collect()
}
