//! Alternating convex search and the two GPSR baselines.
//!
//! Each outer iteration rebuilds `A Psi_theta`, solves the l2-l1 problem for the coefficients (warm-started),
//! thresholds the result at `kappa = beta ||x||_2`, and then sweeps the
//! supported frequency indices in ascending order with a golden-section update
//! of each perturbation. The loop stops once the composite objective
//! `||y - A Psi_theta x||^2 + lambda ||x||_1` changes by less than `tol`
//! relative to the previous iteration.
//!
//! `lambda = alpha ||(A Psi_theta)^T y||_inf` is taken from the unperturbed
//! dictionary on the first iteration and then held, so every half-step descends
//! on one fixed objective. [`LambdaRule::EveryIteration`] recomputes it from the
//! current dictionary instead; the cost trace is then no longer guaranteed to
//! be monotone.

use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dictionary::{frequency_index_of, Overcompleteness, PerturbedDictionary};
use crate::error::{Error, Result};
use crate::freq_search::{SearchOptions, SearchState};
use crate::signals::SensingOperator;
use crate::sparse_solver::{compute_lambda, solve_l2l1, L1Problem, SolverOptions};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaRule {
    /// Computed once, on the first outer iteration.
    #[default]
    Fixed,
    /// Recomputed from the current dictionary before every coefficient solve.
    EveryIteration,
}

impl std::str::FromStr for LambdaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fixed" => Ok(LambdaRule::Fixed),
            "every-iteration" => Ok(LambdaRule::EveryIteration),
            other => Err(Error::InvalidParameter(format!("unknown lambda rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcsConfig {
    /// `lambda = alpha ||(A Psi)^T y||_inf`.
    pub alpha: f64,
    pub lambda_rule: LambdaRule,
    /// `kappa = beta ||x||_2`.
    pub beta: f64,
    /// Relative change of the objective that ends the outer loop.
    pub tol: f64,
    pub q: Overcompleteness,
    pub max_outer: usize,
    pub solver: SolverOptions,
    pub search: SearchOptions,
    /// When false the perturbations stay at zero (plain repeated l1 solves).
    pub search_frequencies: bool,
}

impl Default for AcsConfig {
    fn default() -> Self {
        AcsConfig {
            alpha: 0.1,
            lambda_rule: LambdaRule::Fixed,
            beta: 0.1,
            tol: 1e-5,
            q: Overcompleteness::ONE,
            max_outer: 50,
            solver: SolverOptions::default(),
            search: SearchOptions::default(),
            search_frequencies: true,
        }
    }
}

impl AcsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("tol", self.tol),
            ("solver.tol", self.solver.tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        if let Some(t) = self.search.tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("search tol must be positive, got {t}")));
            }
        }
        if self.max_outer == 0 || self.solver.max_iter == 0 {
            return Err(Error::InvalidParameter("iteration limits must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    /// Coefficient indices with `|x| >= kappa`, ascending.
    pub indices: Vec<usize>,
    pub kappa: f64,
    /// Non-DC frequency indices touched by `indices`, ascending and unique.
    pub frequencies: Vec<usize>,
}

pub fn support_set(x: &DVector<f64>, beta: f64, grid: usize) -> SupportSet {
    let kappa = beta * x.norm();
    let indices: Vec<usize> = if kappa > 0.0 {
        x.iter()
            .enumerate()
            .filter(|(_, v)| v.abs() >= kappa)
            .map(|(i, _)| i)
            .collect()
    } else {
        Vec::new()
    };
    let mut frequencies: Vec<usize> = indices
        .iter()
        .map(|&i| frequency_index_of(i, grid))
        .filter(|&j| j != 0)
        .collect();
    frequencies.sort_unstable();
    frequencies.dedup();
    SupportSet {
        indices,
        kappa,
        frequencies,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Acs,
    Gpsr,
    OcGpsr,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Acs => "acs",
            Method::Gpsr => "gpsr",
            Method::OcGpsr => "oc-gpsr",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "acs" => Ok(Method::Acs),
            "gpsr" => Ok(Method::Gpsr),
            "oc-gpsr" => Ok(Method::OcGpsr),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub method: Method,
    pub overcompleteness: Overcompleteness,
    pub x_hat: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub z_hat: Vec<f64>,
    /// Objective after each outer iteration.
    pub cost_trace: Vec<f64>,
    pub lambda: f64,
    pub kappa: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    pub wall_time_ms: f64,
}

impl RecoveryResult {
    pub fn grid_size(&self) -> usize {
        self.x_hat.len()
    }

    /// Rebuilds the dictionary the result refers to.
    pub fn dictionary(&self) -> Result<PerturbedDictionary> {
        PerturbedDictionary::build(self.z_hat.len(), self.overcompleteness, self.theta_hat.clone())
    }
}

pub fn reconstruct(dict: &PerturbedDictionary, x: &DVector<f64>) -> Result<DVector<f64>> {
    dict.reconstruct(x)
}

fn check_dims(y: &DVector<f64>, a: &SensingOperator) -> Result<()> {
    if y.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "measurement has length {}, operator has {} rows",
            y.len(),
            a.rows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("measurement"));
    }
    Ok(())
}

fn composite_objective(
    y: &DVector<f64>,
    a: &SensingOperator,
    dict: &PerturbedDictionary,
    x: &DVector<f64>,
    lambda: f64,
) -> Result<(f64, DVector<f64>)> {
    let z = dict.reconstruct(x)?;
    let residual = y - a.apply(&z)?;
    Ok((residual.norm_squared() + lambda * x.lp_norm(1), z))
}

pub fn run_acs(y: &DVector<f64>, a: &SensingOperator, config: &AcsConfig) -> Result<RecoveryResult> {
    config.validate()?;
    check_dims(y, a)?;
    let start = Instant::now();

    let mut dict = PerturbedDictionary::unperturbed(a.cols(), config.q)?;
    let grid = dict.grid_size();
    let mut x = DVector::zeros(grid);
    let mut z = DVector::zeros(a.cols());
    let mut cost_trace = Vec::new();
    let mut lambda = 0.0;
    let mut kappa = 0.0;
    let mut converged = false;

    for _ in 0..config.max_outer {
        let design = a.compose(dict.atoms())?;
        if cost_trace.is_empty() || config.lambda_rule == LambdaRule::EveryIteration {
            lambda = compute_lambda(&design, y, config.alpha)?;
        }
        let problem = L1Problem::new(&design, y, lambda)?;
        x = solve_l2l1(&problem, Some(&x), config.solver)?.x;

        let support = support_set(&x, config.beta, grid);
        kappa = support.kappa;
        if config.search_frequencies && !support.frequencies.is_empty() {
            let mut state = SearchState::new(a, dict, &x, y)?;
            for &j in &support.frequencies {
                let theta = state.golden_search(j, config.search)?;
                state.accept(j, theta)?;
            }
            dict = state.into_dictionary();
        }

        let (f, z_now) = composite_objective(y, a, &dict, &x, lambda)?;
        z = z_now;
        let previous = cost_trace.last().copied();
        cost_trace.push(f);
        let done = match previous {
            Some(p) if p == 0.0 => true,
            Some(p) => ((f - p) / p).abs() < config.tol,
            None => f == 0.0,
        };
        if done {
            converged = true;
            break;
        }
    }

    Ok(RecoveryResult {
        method: Method::Acs,
        overcompleteness: config.q,
        x_hat: x.iter().copied().collect(),
        theta_hat: dict.theta().to_vec(),
        z_hat: z.iter().copied().collect(),
        outer_iterations: cost_trace.len(),
        cost_trace,
        lambda,
        kappa,
        converged,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// One l1 solve on the unperturbed dictionary at overcompleteness `q`.
///
/// `q = 1` is plain GPSR on the Fourier basis, larger `q` is OC-GPSR.
pub fn run_gpsr_baseline(
    y: &DVector<f64>,
    a: &SensingOperator,
    q: Overcompleteness,
    config: &AcsConfig,
) -> Result<RecoveryResult> {
    config.validate()?;
    check_dims(y, a)?;
    let start = Instant::now();

    let dict = PerturbedDictionary::unperturbed(a.cols(), q)?;
    let design = a.compose(dict.atoms())?;
    let lambda = compute_lambda(&design, y, config.alpha)?;
    let problem = L1Problem::new(&design, y, lambda)?;
    let report = solve_l2l1(&problem, None, config.solver)?;
    let x = report.x;
    let kappa = config.beta * x.norm();
    let (f, z) = composite_objective(y, a, &dict, &x, lambda)?;

    Ok(RecoveryResult {
        method: if q == Overcompleteness::ONE {
            Method::Gpsr
        } else {
            Method::OcGpsr
        },
        overcompleteness: q,
        x_hat: x.iter().copied().collect(),
        theta_hat: dict.theta().to_vec(),
        z_hat: z.iter().copied().collect(),
        cost_trace: vec![f],
        lambda,
        kappa,
        outer_iterations: 1,
        converged: report.converged,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
