//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use harmonic_acs::dictionary::{Overcompleteness, PerturbedDictionary};
use harmonic_acs::signals::{derive_seed, gaussian_sensing, SensingOperator};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller, deliberately different from the library's sampler
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Entry `(n, col)` of the perturbed dictionary, evaluated straight from the
/// atom definition with 0-based columns.
pub fn atom_entry(n_samples: usize, grid: usize, theta: &[f64], n: usize, col: usize) -> f64 {
    let scale = (2.0 / n_samples as f64).sqrt();
    if col < grid / 2 {
        let f = col as f64 / grid as f64 + theta[col];
        scale * (2.0 * PI * n as f64 * f).cos()
    } else {
        let j = grid - 1 - col;
        let f = j as f64 / grid as f64 + theta[j];
        -scale * (2.0 * PI * n as f64 * f).sin()
    }
}

pub fn oracle_dictionary(n_samples: usize, grid: usize, theta: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(n_samples, grid, |n, col| atom_entry(n_samples, grid, theta, n, col))
}

/// `||y - A Psi_theta' x||^2` with `theta'` equal to `theta` except at `j`,
/// built from scratch with the scalar oracle.
pub fn rebuild_cost(
    a: &DMatrix<f64>,
    n_samples: usize,
    grid: usize,
    theta: &[f64],
    j: usize,
    candidate: f64,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> f64 {
    let mut t = theta.to_vec();
    t[j] = candidate;
    let psi = oracle_dictionary(n_samples, grid, &t);
    (y - a * (psi * x)).norm_squared()
}

/// A frequency-search problem with a known answer region: a few off-grid
/// tones, coefficients at their true values, every perturbation correct
/// except the one at `j`, which starts at zero.
pub struct SearchProblem {
    pub a: SensingOperator,
    pub dict: PerturbedDictionary,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub j: usize,
    pub true_theta: f64,
}

pub fn search_problem(seed: u64) -> SearchProblem {
    let n = 64;
    let m = 40;
    let mut r = rng(derive_seed(seed, &[77]));
    let a = gaussian_sensing(m, n, derive_seed(seed, &[78])).unwrap();
    let bound = 0.5 / n as f64;
    let mut bins: Vec<usize> = Vec::new();
    while bins.len() < 3 {
        let b = r.gen_range(1..n / 2);
        if bins.iter().all(|&o| o.abs_diff(b) >= 2) {
            bins.push(b);
        }
    }
    let mut theta = vec![0.0; n / 2];
    let mut x = DVector::zeros(n);
    for &b in &bins {
        theta[b] = r.gen_range(-0.9 * bound..0.9 * bound);
        let phase: f64 = r.gen_range(0.0..2.0 * PI);
        x[b] = phase.cos();
        x[n - 1 - b] = phase.sin();
    }
    let truth = PerturbedDictionary::build(n, Overcompleteness::ONE, theta.clone()).unwrap();
    let y = a.apply(&truth.reconstruct(&x).unwrap()).unwrap();
    let j = bins[0];
    let true_theta = theta[j];
    theta[j] = 0.0;
    let dict = PerturbedDictionary::build(n, Overcompleteness::ONE, theta).unwrap();
    SearchProblem {
        a,
        dict,
        x,
        y,
        j,
        true_theta,
    }
}

/// Grid argmin of the rebuilt cost over `points` evenly spaced perturbations.
pub fn brute_force_argmin(p: &SearchProblem, points: usize) -> (f64, f64) {
    let n = p.dict.n_samples();
    let grid = p.dict.grid_size();
    let bound = p.dict.theta_bound();
    let step = 2.0 * bound / (points - 1) as f64;
    let a = p.a.matrix();
    let mut best = (0.0, f64::INFINITY);
    for i in 0..points {
        let t = -bound + step * i as f64;
        let c = rebuild_cost(a, n, grid, p.dict.theta(), p.j, t, &p.x, &p.y);
        if c < best.1 {
            best = (t, c);
        }
    }
    (best.0, step)
}

/// `m x k` matrix with orthonormal columns.
pub fn orthonormal_design(m: usize, k: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let g = DMatrix::from_fn(m, k, |_, _| normal(&mut r));
    g.qr().q()
}

/// Minimizer of `||y - Q x||^2 + lambda ||x||_1` for orthonormal `Q`.
pub fn soft_threshold_solution(q: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> DVector<f64> {
    (q.transpose() * y).map(|v| v.signum() * (v.abs() - lambda / 2.0).max(0.0))
}

/// Golden-section result against the 2001-point rebuilt-cost grid on `count`
/// seeded problems. Returns (agreeing problems, worst |difference| / allowed).
pub fn golden_vs_grid(count: u64) -> (usize, f64) {
    use harmonic_acs::freq_search::{SearchOptions, SearchState};
    let mut agree = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..count {
        let p = search_problem(seed);
        let opts = SearchOptions::default();
        let state = SearchState::new(&p.a, p.dict.clone(), &p.x, &p.y).unwrap();
        let golden = state.golden_search(p.j, opts).unwrap();
        let (grid_min, step) = brute_force_argmin(&p, 2001);
        let allowed = opts.resolved_tol(p.dict.grid_size()).max(step);
        let ratio = (golden - grid_min).abs() / allowed;
        worst = worst.max(ratio);
        if ratio <= 1.0 {
            agree += 1;
        }
    }
    (agree, worst)
}

/// Largest per-coefficient gap between the l1 solver and the soft-threshold
/// closed form over several orthonormal designs.
pub fn soft_threshold_gap(seeds: std::ops::Range<u64>) -> f64 {
    use harmonic_acs::sparse_solver::{compute_lambda, solve_l2l1, L1Problem, SolverOptions};
    let mut worst: f64 = 0.0;
    for seed in seeds {
        let q = orthonormal_design(64, 40, seed);
        let mut r = rng(seed + 500);
        let y = DVector::from_fn(64, |_, _| normal(&mut r));
        for alpha in [0.05, 0.3, 0.7] {
            let lambda = compute_lambda(&q, &y, alpha).unwrap();
            let problem = L1Problem::new(&q, &y, lambda).unwrap();
            let report = solve_l2l1(&problem, None, SolverOptions::default()).unwrap();
            let expected = soft_threshold_solution(&q, &y, lambda);
            worst = worst.max((&report.x - expected).amax());
        }
    }
    worst
}

/// Largest relative gap between the incremental frequency cost and a full
/// rebuild over random instances.
pub fn incremental_cost_gap(seeds: std::ops::Range<u64>) -> f64 {
    use harmonic_acs::freq_search::SearchState;
    let mut worst: f64 = 0.0;
    for seed in seeds {
        let n = 48;
        let q = Overcompleteness::new(3, 2).unwrap();
        let grid = q.grid_size(n).unwrap();
        let mut r = rng(seed + 900);
        let bound = 0.5 / grid as f64;
        let theta: Vec<f64> = (0..grid / 2)
            .map(|j| if j == 0 { 0.0 } else { r.gen_range(-bound..bound) })
            .collect();
        let dict = PerturbedDictionary::build(n, q, theta.clone()).unwrap();
        let a = gaussian_sensing(30, n, seed).unwrap();
        let x = DVector::from_fn(grid, |_, _| normal(&mut r));
        let y = DVector::from_fn(30, |_, _| normal(&mut r));
        let state = SearchState::new(&a, dict, &x, &y).unwrap();
        for _ in 0..10 {
            let j = r.gen_range(1..grid / 2);
            let t = r.gen_range(-bound..bound);
            let fast = state.cost_at(j, t).unwrap();
            let slow = rebuild_cost(a.matrix(), n, grid, &theta, j, t, &x, &y);
            worst = worst.max((fast - slow).abs() / slow);
        }
    }
    worst
}
