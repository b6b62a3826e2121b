//! Recover one noisy off-grid scene with ACS and compare tones to the truth.
//!
//! `cargo run --example single_recovery`

use harmonic_acs::dictionary::Overcompleteness;
use harmonic_acs::metrics::{all_tones_located, extract_tones, scene_rmse, support_err, truth_tones};
use harmonic_acs::signals::{gaussian_sensing, generate_scene, measure, SceneOptions};
use harmonic_acs::{run_acs, AcsConfig};

fn main() -> harmonic_acs::Result<()> {
    let (n, m, s) = (256, 128, 6);
    let scene = generate_scene(n, s, Overcompleteness::ONE, 11, SceneOptions::default())?;
    let a = gaussian_sensing(m, n, 12)?;
    let measurement = measure(&scene, &a, 40.0, 13)?;

    let result = run_acs(&measurement.target(), &a, &AcsConfig::default())?;
    println!(
        "{} outer iterations, converged {}, cost {:.4} -> {:.4}",
        result.outer_iterations,
        result.converged,
        result.cost_trace[0],
        result.cost_trace.last().unwrap()
    );

    let truth = truth_tones(&scene)?;
    let estimate = extract_tones(&result, result.kappa);
    println!("true tones:");
    for t in &truth.tones {
        println!("  f = {:.5}  phase {:+.3}", t.frequency, t.amplitude.arg());
    }
    println!("estimated tones:");
    for e in &estimate.tones {
        println!("  f = {:.5}  |a| = {:.3}  phase {:+.3}", e.frequency, e.amplitude.norm(), e.amplitude.arg());
    }
    println!(
        "normalized rmse {:.3e}, err {:.3}, all located {}",
        scene_rmse(&scene, &result)?,
        support_err(&truth, &estimate),
        all_tones_located(&truth, &estimate)
    );
    Ok(())
}
