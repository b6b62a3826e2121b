//! Solve `min ||y - Bx||^2 + lambda ||x||_1` with the gradient projection solver.
//!
//! `cargo run --example sparse_solver`

use harmonic_acs::signals::gaussian_sensing;
use harmonic_acs::sparse_solver::{compute_lambda, solve_l2l1, L1Problem, SolverOptions};
use nalgebra::DVector;

fn main() -> harmonic_acs::Result<()> {
    let (m, k) = (40, 100);
    let b = gaussian_sensing(m, k, 7)?.matrix().clone();

    let mut x_true = DVector::zeros(k);
    x_true[5] = 1.0;
    x_true[42] = -0.7;
    x_true[77] = 0.4;
    let y = &b * &x_true;

    for alpha in [0.3, 0.1, 0.01] {
        let lambda = compute_lambda(&b, &y, alpha)?;
        let problem = L1Problem::new(&b, &y, lambda)?;
        let report = solve_l2l1(&problem, None, SolverOptions::default())?;
        let support: Vec<usize> = (0..k).filter(|&i| report.x[i].abs() > 1e-6).collect();
        println!(
            "alpha {alpha:<5} lambda {lambda:8.4}  objective {:9.5}  {} iterations  support {support:?}",
            report.objective, report.iterations
        );
        println!(
            "  x[5] = {:.4}, x[42] = {:.4}, x[77] = {:.4}, optimality violation {:.1e}",
            report.x[5],
            report.x[42],
            report.x[77],
            problem.optimality_violation(&report.x)
        );
    }
    Ok(())
}
