//! Golden-section search for one perturbation with the coefficients held fixed.
//!
//! `cargo run --example frequency_search`

use harmonic_acs::dictionary::{Overcompleteness, PerturbedDictionary};
use harmonic_acs::freq_search::{SearchOptions, SearchState};
use harmonic_acs::signals::gaussian_sensing;
use nalgebra::DVector;

fn main() -> harmonic_acs::Result<()> {
    let n = 64;
    let j = 9;
    let true_theta = 0.3 / n as f64;
    let phase = 1.1f64;

    let mut x = DVector::zeros(n);
    x[j] = phase.cos();
    x[n - 1 - j] = phase.sin();
    let truth = PerturbedDictionary::unperturbed(n, Overcompleteness::ONE)?.with_perturbation(j, true_theta)?;
    let a = gaussian_sensing(32, n, 3)?;
    let y = a.apply(&truth.reconstruct(&x)?)?;

    let start = PerturbedDictionary::unperturbed(n, Overcompleteness::ONE)?;
    let mut state = SearchState::new(&a, start, &x, &y)?;
    let bound = state.dictionary().theta_bound();
    println!("cost across the bin:");
    for i in 0..=8 {
        let t = -bound + 2.0 * bound * i as f64 / 8.0;
        println!("  theta N = {:+.3}  cost {:.5}", t * n as f64, state.cost_at(j, t)?);
    }

    let found = state.golden_search(j, SearchOptions::default())?;
    state.accept(j, found)?;
    println!("true theta N = {:.5}, found {:.5}", true_theta * n as f64, found * n as f64);
    println!("residual after accept {:.2e}", state.residual().norm());
    println!("tone frequency {:.6} vs {:.6}", (j as f64 / n as f64 + found), j as f64 / n as f64 + true_theta);
    Ok(())
}
