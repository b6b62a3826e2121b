//! ACS against fixed-grid GPSR and overcomplete OC-GPSR on the same scene.
//!
//! `cargo run --example baselines`

use harmonic_acs::dictionary::Overcompleteness;
use harmonic_acs::metrics::{extract_tones, scene_rmse, support_err, truth_tones};
use harmonic_acs::signals::{gaussian_sensing, generate_scene, measure, SceneOptions};
use harmonic_acs::{run_acs, run_gpsr_baseline, AcsConfig, RecoveryResult};

fn main() -> harmonic_acs::Result<()> {
    let (n, m) = (256, 128);
    let scene = generate_scene(n, 8, Overcompleteness::ONE, 21, SceneOptions::default())?;
    let a = gaussian_sensing(m, n, 22)?;
    let y = measure(&scene, &a, 40.0, 23)?.target();
    let config = AcsConfig::default();
    let truth = truth_tones(&scene)?;

    let mut runs: Vec<(String, RecoveryResult)> = vec![
        ("acs".into(), run_acs(&y, &a, &config)?),
        ("gpsr".into(), run_gpsr_baseline(&y, &a, Overcompleteness::ONE, &config)?),
    ];
    for q in [4, 8] {
        let q = Overcompleteness::integer(q)?;
        runs.push((format!("oc-gpsr Q={}", q.as_f64()), run_gpsr_baseline(&y, &a, q, &config)?));
    }

    println!("{:<14} {:>10} {:>8} {:>9} {:>8}", "method", "rmse", "err", "nonzeros", "ms");
    for (name, r) in &runs {
        let estimate = extract_tones(r, r.kappa);
        let nonzeros = r.x_hat.iter().filter(|v| v.abs() >= r.kappa && **v != 0.0).count();
        println!(
            "{name:<14} {:>10.3e} {:>8.3} {:>9} {:>8.1}",
            scene_rmse(&scene, r)?,
            support_err(&truth, &estimate),
            nonzeros,
            r.wall_time_ms
        );
    }
    Ok(())
}
