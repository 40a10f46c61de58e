//! Classical minimizers for the (penalized) cost.
//!
//! Two methods: nonlinear conjugate gradient (Polak-Ribiere with restart,
//! Armijo backtracking) and the sequential single-parameter sinusoidal-fit
//! method. The latter receives the energy and constraint expectations
//! separately: each component is sinusoidal in one angle, but the penalized
//! cost F = E + sum mu_i (A_i - a_i)^2 is a degree-2 trigonometric
//! polynomial, so F is reconstructed from component fits and minimized
//! analytically per parameter.

use alloc::vec::Vec;

// trait-based float math for the no_std build; redundant when tests link std
#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Optimization method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cg,
    Nft,
}

/// Shared optimizer settings. `sweeps`, `seed` and `shuffle_visits` apply to
/// the sequential method; `max_iterations` and `gradient_tolerance` to CG.
/// `max_evaluations` bounds the evaluation count for either method, with a
/// gradient call charged as `gradient_cost` evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub sweeps: usize,
    pub seed: u64,
    pub shuffle_visits: bool,
    pub max_evaluations: Option<usize>,
    pub gradient_cost: usize,
}

impl OptimizerConfig {
    pub fn cg(max_iterations: usize, gradient_tolerance: f64) -> Self {
        OptimizerConfig {
            method: Method::Cg,
            max_iterations,
            gradient_tolerance,
            sweeps: 0,
            seed: 0,
            shuffle_visits: false,
            max_evaluations: None,
            gradient_cost: 1,
        }
    }

    pub fn nft(sweeps: usize) -> Self {
        OptimizerConfig {
            method: Method::Nft,
            max_iterations: sweeps,
            gradient_tolerance: 1e-10,
            sweeps,
            seed: 0,
            shuffle_visits: false,
            max_evaluations: None,
            gradient_cost: 1,
        }
    }

    pub fn with_budget(mut self, max_evaluations: usize) -> Self {
        self.max_evaluations = Some(max_evaluations);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 && self.sweeps == 0 {
            return Err(Error::InvalidConfig("iteration budget is zero".into()));
        }
        if self.gradient_tolerance <= 0.0 {
            return Err(Error::InvalidConfig("gradient tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Record of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    pub history: Vec<(usize, f64)>,
}

const ARMIJO_C: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

/// Nonlinear conjugate gradient: Polak-Ribiere beta clamped at zero
/// (restart), Armijo backtracking from unit step. Stops at gradient norm
/// below tolerance, iteration limit, or evaluation budget.
pub fn cg_minimize<F, G>(
    mut value_fn: F,
    mut gradient_fn: G,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptimizationTrace>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    cfg.validate()?;
    let mut evals = 0usize;
    let mut x = x0.to_vec();
    let mut f = value_fn(&x);
    evals += 1;
    check_finite_scalar(f, &x, f)?;

    let mut history = Vec::new();
    history.push((0, f));
    let mut best_params = x.clone();
    let mut best_value = f;

    let mut g = gradient_fn(&x);
    evals += cfg.gradient_cost;
    check_finite_slice(&g, &best_params, best_value)?;
    let mut direction: Vec<f64> = g.iter().map(|v| -v).collect();

    for iteration in 1..=cfg.max_iterations {
        let gnorm = norm(&g);
        if gnorm <= cfg.gradient_tolerance {
            break;
        }
        if let Some(budget) = cfg.max_evaluations {
            if evals + cfg.gradient_cost + 1 > budget {
                break;
            }
        }

        // descent check; fall back to steepest descent if the conjugate
        // direction turned uphill
        let mut slope = dot(&g, &direction);
        if slope >= 0.0 {
            direction = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }

        let mut step = 1.0;
        let mut accepted = None;
        let mut trial = x.clone();
        for _ in 0..MAX_BACKTRACKS {
            for (t, (xi, di)) in trial.iter_mut().zip(x.iter().zip(&direction)) {
                *t = xi + step * di;
            }
            let f_trial = value_fn(&trial);
            evals += 1;
            check_finite_scalar(f_trial, &best_params, best_value)?;
            if f_trial <= f + ARMIJO_C * step * slope {
                accepted = Some(f_trial);
                break;
            }
            step *= BACKTRACK;
            if let Some(budget) = cfg.max_evaluations {
                if evals + cfg.gradient_cost + 1 > budget {
                    break;
                }
            }
        }
        let Some(f_new) = accepted else {
            break; // line search stalled; current iterate is the answer
        };

        x.copy_from_slice(&trial);
        f = f_new;
        history.push((iteration, f));
        if f < best_value {
            best_value = f;
            best_params.copy_from_slice(&x);
        }

        let g_new = gradient_fn(&x);
        evals += cfg.gradient_cost;
        check_finite_slice(&g_new, &best_params, best_value)?;

        // Polak-Ribiere with restart when beta would go negative
        let denom = dot(&g, &g);
        let beta = if denom > 0.0 {
            (dot(&g_new, &g_new) - dot(&g_new, &g)).max(0.0) / denom
        } else {
            0.0
        };
        for (d, gn) in direction.iter_mut().zip(&g_new) {
            *d = -gn + beta * *d;
        }
        g = g_new;
    }

    Ok(OptimizationTrace { best_params, best_value, evaluations: evals, history })
}

fn check_finite_scalar(v: f64, last_params: &[f64], last_value: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteObjective {
            last_good_params: last_params.to_vec(),
            last_good_value: last_value,
        })
    }
}

fn check_finite_slice(v: &[f64], last_params: &[f64], last_value: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteObjective {
            last_good_params: last_params.to_vec(),
            last_good_value: last_value,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// f(theta) = offset + cos_coef * cos(theta) + sin_coef * sin(theta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoid {
    pub offset: f64,
    pub cos_coef: f64,
    pub sin_coef: f64,
}

impl Sinusoid {
    pub fn eval(&self, theta: f64) -> f64 {
        self.offset + self.cos_coef * theta.cos() + self.sin_coef * theta.sin()
    }
}

/// Fit a + b*cos(theta - c) through three samples, returned in the
/// (offset, cos, sin) parameterization. The three angles must be distinct
/// modulo 2 pi; the evaluation phases theta0, theta0 +- 2pi/3 always are.
pub fn fit_sinusoid(samples: &[(f64, f64); 3]) -> Result<Sinusoid> {
    // solve [1 cos(x) sin(x)] [a p q]^T = z by Cramer's rule
    let (x0, z0) = samples[0];
    let (x1, z1) = samples[1];
    let (x2, z2) = samples[2];
    let rows = [
        [1.0, x0.cos(), x0.sin(), z0],
        [1.0, x1.cos(), x1.sin(), z1],
        [1.0, x2.cos(), x2.sin(), z2],
    ];
    let det = det3(&rows, [0, 1, 2]);
    if det.abs() < 1e-12 {
        return Err(Error::SinusoidFit { residual: det.abs() });
    }
    let a = det3(&rows, [3, 1, 2]) / det;
    let p = det3(&rows, [0, 3, 2]) / det;
    let q = det3(&rows, [0, 1, 3]) / det;
    Ok(Sinusoid { offset: a, cos_coef: p, sin_coef: q })
}

fn det3(rows: &[[f64; 4]; 3], cols: [usize; 3]) -> f64 {
    let m = |r: usize, c: usize| rows[r][cols[c]];
    m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
        - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
}

/// Energy and constraint expectations at one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentValues {
    pub energy: f64,
    pub constraints: Vec<f64>,
}

/// Multipliers and targets defining F = E + sum mu_i (A_i - a_i)^2.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyStructure {
    pub multipliers: Vec<f64>,
    pub targets: Vec<f64>,
}

impl PenaltyStructure {
    pub fn unconstrained() -> Self {
        PenaltyStructure { multipliers: Vec::new(), targets: Vec::new() }
    }

    pub fn cost(&self, components: &ComponentValues) -> f64 {
        let mut f = components.energy;
        for ((mu, target), value) in
            self.multipliers.iter().zip(&self.targets).zip(&components.constraints)
        {
            let r = value - target;
            f += mu * r * r;
        }
        f
    }
}

/// F restricted to one angle: c0 + c1c cos(t) + c1s sin(t) + c2c cos(2t) + c2s sin(2t).
#[derive(Debug, Clone, Copy)]
struct TrigPoly2 {
    c0: f64,
    c1c: f64,
    c1s: f64,
    c2c: f64,
    c2s: f64,
}

impl TrigPoly2 {
    fn eval(&self, t: f64) -> f64 {
        self.c0
            + self.c1c * t.cos()
            + self.c1s * t.sin()
            + self.c2c * (2.0 * t).cos()
            + self.c2s * (2.0 * t).sin()
    }

    fn deriv(&self, t: f64) -> f64 {
        -self.c1c * t.sin() + self.c1s * t.cos() - 2.0 * self.c2c * (2.0 * t).sin()
            + 2.0 * self.c2s * (2.0 * t).cos()
    }

    fn second_deriv(&self, t: f64) -> f64 {
        -self.c1c * t.cos() - self.c1s * t.sin() - 4.0 * self.c2c * (2.0 * t).cos()
            - 4.0 * self.c2s * (2.0 * t).sin()
    }

    /// Global minimizer on [-pi, pi): dense grid then one Newton polish.
    fn minimize(&self, grid_points: usize, include: f64) -> f64 {
        let mut best_t = include;
        let mut best_v = self.eval(include);
        for i in 0..grid_points {
            let t = -core::f64::consts::PI
                + 2.0 * core::f64::consts::PI * (i as f64) / (grid_points as f64);
            let v = self.eval(t);
            if v < best_v {
                best_v = v;
                best_t = t;
            }
        }
        let h = self.second_deriv(best_t);
        if h > 0.0 {
            let polished = wrap_angle(best_t - self.deriv(best_t) / h);
            if polished.is_finite() && self.eval(polished) < best_v {
                best_t = polished;
            }
        }
        best_t
    }
}

fn wrap_angle(t: f64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut w = (t + core::f64::consts::PI) % two_pi;
    if w < 0.0 {
        w += two_pi;
    }
    w - core::f64::consts::PI
}

const NFT_PHASE: f64 = 2.0 * core::f64::consts::PI / 3.0;
const NFT_GRID: usize = 1024;
const NFT_RESIDUAL_TOL: f64 = 1e-8;

/// Sequential per-parameter minimizer. For each parameter it samples the
/// component expectations at the current angle and at +-2pi/3, fits each as
/// a sinusoid, reconstructs F analytically, and jumps to the global
/// minimizer of the reconstruction. The reconstruction is then checked
/// against a fresh evaluation at the new angle; disagreement means the input
/// was not sinusoidal and is reported as an error.
pub fn nft_minimize<F>(
    mut component_evals: F,
    structure: &PenaltyStructure,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptimizationTrace>
where
    F: FnMut(&[f64]) -> ComponentValues,
{
    cfg.validate()?;
    let n_constraints = structure.multipliers.len();
    if n_constraints != structure.targets.len() {
        return Err(Error::MultiplierCount {
            constraints: structure.targets.len(),
            multipliers: structure.multipliers.len(),
        });
    }

    let mut evals = 0usize;
    let mut x = x0.to_vec();
    let mut base = component_evals(&x);
    evals += 1;
    let mut f = structure.cost(&base);
    check_finite_scalar(f, &x, f)?;

    let mut history = Vec::new();
    history.push((0, f));
    let mut best_params = x.clone();
    let mut best_value = f;
    let mut updates = 0usize;

    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    'sweeps: for _ in 0..cfg.sweeps {
        if cfg.shuffle_visits {
            order.shuffle(&mut rng);
        }
        for &k in &order {
            if let Some(budget) = cfg.max_evaluations {
                if evals + 3 > budget {
                    break 'sweeps;
                }
            }
            let theta = x[k];

            x[k] = theta + NFT_PHASE;
            let plus = component_evals(&x);
            x[k] = theta - NFT_PHASE;
            let minus = component_evals(&x);
            x[k] = theta;
            evals += 2;

            // fit each component and assemble the degree-2 reconstruction
            let energy_fit = fit_component(theta, base.energy, plus.energy, minus.energy)?;
            let mut poly = TrigPoly2 {
                c0: energy_fit.offset,
                c1c: energy_fit.cos_coef,
                c1s: energy_fit.sin_coef,
                c2c: 0.0,
                c2s: 0.0,
            };
            let mut constraint_fits = Vec::with_capacity(n_constraints);
            for i in 0..n_constraints {
                let fit = fit_component(
                    theta,
                    base.constraints[i],
                    plus.constraints[i],
                    minus.constraints[i],
                )?;
                let mu = structure.multipliers[i];
                let d = fit.offset - structure.targets[i];
                let (p, q) = (fit.cos_coef, fit.sin_coef);
                poly.c0 += mu * (d * d + 0.5 * (p * p + q * q));
                poly.c1c += mu * 2.0 * d * p;
                poly.c1s += mu * 2.0 * d * q;
                poly.c2c += mu * 0.5 * (p * p - q * q);
                poly.c2s += mu * p * q;
                constraint_fits.push(fit);
            }

            let theta_new = poly.minimize(NFT_GRID, theta);
            let predicted = poly.eval(theta_new);

            x[k] = theta_new;
            base = component_evals(&x);
            evals += 1;
            f = structure.cost(&base);
            check_finite_scalar(f, &best_params, best_value)?;

            let residual = (f - predicted).abs();
            if residual > NFT_RESIDUAL_TOL {
                return Err(Error::SinusoidFit { residual });
            }

            updates += 1;
            history.push((updates, f));
            if f < best_value {
                best_value = f;
                best_params.copy_from_slice(&x);
            }
        }
    }

    Ok(OptimizationTrace { best_params, best_value, evaluations: evals, history })
}

fn fit_component(theta: f64, at: f64, plus: f64, minus: f64) -> Result<Sinusoid> {
    fit_sinusoid(&[(theta, at), (theta + NFT_PHASE, plus), (theta - NFT_PHASE, minus)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    #[test]
    fn cg_quadratic_bowl() {
        let cfg = OptimizerConfig::cg(50, 1e-12);
        let trace = cg_minimize(
            |x| x.iter().map(|v| v * v).sum(),
            |x| x.iter().map(|v| 2.0 * v).collect(),
            &[1.0, 1.0],
            &cfg,
        )
        .unwrap();
        assert!(trace.best_value < 1e-10, "best {}", trace.best_value);
    }

    #[test]
    fn cg_converges_within_dimension_iterations_on_a_quadratic() {
        let cfg = OptimizerConfig::cg(100, 1e-12);
        let dim = 5;
        let trace = cg_minimize(
            |x| x.iter().map(|v| v * v).sum(),
            |x| x.iter().map(|v| 2.0 * v).collect(),
            &vec![1.0; dim],
            &cfg,
        )
        .unwrap();
        assert!(trace.best_value < 1e-8);
        // history holds the start plus one entry per iteration taken
        assert!(trace.history.len() <= dim + 1, "took {} iterations", trace.history.len() - 1);
    }

    #[test]
    fn cg_shifted_parabola() {
        let cfg = OptimizerConfig::cg(100, 1e-10);
        let trace = cg_minimize(
            |x| (x[0] - 3.0) * (x[0] - 3.0),
            |x| vec![2.0 * (x[0] - 3.0)],
            &[0.0],
            &cfg,
        )
        .unwrap();
        assert!((trace.best_params[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn cg_rejects_non_finite() {
        let cfg = OptimizerConfig::cg(10, 1e-8);
        let err = cg_minimize(
            |x| if x[0] > 0.5 { f64::NAN } else { x[0] },
            |_| vec![-1.0],
            &[0.0],
            &cfg,
        );
        assert!(matches!(err, Err(Error::NonFiniteObjective { .. })));
    }

    #[test]
    fn sinusoid_fit_roundtrip() {
        let truth = Sinusoid { offset: 0.3, cos_coef: -1.2, sin_coef: 0.7 };
        let theta = 0.4;
        let fit = fit_sinusoid(&[
            (theta, truth.eval(theta)),
            (theta + NFT_PHASE, truth.eval(theta + NFT_PHASE)),
            (theta - NFT_PHASE, truth.eval(theta - NFT_PHASE)),
        ])
        .unwrap();
        // predict a fourth point
        assert!((fit.eval(1.9) - truth.eval(1.9)).abs() < 1e-12);
    }

    #[test]
    fn nft_one_parameter_cosine() {
        // E(theta) = cos(theta): exact minimizer at pi after one sweep
        let cfg = OptimizerConfig::nft(1);
        let trace = nft_minimize(
            |x| ComponentValues { energy: x[0].cos(), constraints: vec![] },
            &PenaltyStructure::unconstrained(),
            &[0.3],
            &cfg,
        )
        .unwrap();
        assert!((trace.best_value + 1.0).abs() < 1e-9, "best {}", trace.best_value);
    }

    #[test]
    fn nft_penalty_only_cost() {
        // F = mu (cos(theta) - 0)^2, mu = 1: zero at theta = +-pi/2
        let cfg = OptimizerConfig::nft(2);
        let structure = PenaltyStructure { multipliers: vec![1.0], targets: vec![0.0] };
        let trace = nft_minimize(
            |x| ComponentValues { energy: 0.0, constraints: vec![x[0].cos()] },
            &structure,
            &[0.2],
            &cfg,
        )
        .unwrap();
        assert!(trace.best_value.abs() < 1e-12);
        assert!((trace.best_params[0].abs() - PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn nft_never_increases_cost() {
        let structure = PenaltyStructure { multipliers: vec![0.8], targets: vec![0.25] };
        let cfg = OptimizerConfig::nft(3);
        let trace = nft_minimize(
            |x| ComponentValues {
                energy: 0.4 * x[0].cos() + 0.3 * (x[1] + 0.7).cos(),
                constraints: vec![0.5 * x[0].sin() * x[1].cos()],
            },
            &structure,
            &[0.9, -1.3],
            &cfg,
        )
        .unwrap();
        for pair in trace.history.windows(2) {
            assert!(pair[1].1 <= pair[0].1 + 1e-10, "cost increased: {pair:?}");
        }
    }

    #[test]
    fn nft_flags_non_sinusoidal_input() {
        let cfg = OptimizerConfig::nft(1);
        let err = nft_minimize(
            |x| ComponentValues { energy: x[0] * x[0], constraints: vec![] },
            &PenaltyStructure::unconstrained(),
            &[0.5, 0.1],
            &cfg,
        );
        assert!(matches!(err, Err(Error::SinusoidFit { .. })));
    }

    #[test]
    fn optimizers_are_deterministic() {
        let cfg = OptimizerConfig::nft(2);
        let run = || {
            nft_minimize(
                |x| ComponentValues {
                    energy: x.iter().enumerate().map(|(i, v)| (v + i as f64).cos()).sum(),
                    constraints: vec![],
                },
                &PenaltyStructure::unconstrained(),
                &[0.1, 0.2, 0.3],
                &cfg,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.best_params, b.best_params);
        assert_eq!(a.history, b.history);
    }
}
