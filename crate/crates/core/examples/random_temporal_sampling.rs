//! Random temporal subsampling: keep M of N time samples and recover the rest.
//!
//! `cargo run --example random_temporal_sampling`

use harmonic_acs::dictionary::Overcompleteness;
use harmonic_acs::metrics::scene_rmse;
use harmonic_acs::signals::{generate_scene, measure, temporal_subsample_sensing, SceneOptions};
use harmonic_acs::{run_acs, run_gpsr_baseline, AcsConfig};

fn main() -> harmonic_acs::Result<()> {
    let (n, m) = (256, 128);
    let options = SceneOptions {
        zero_phase: true,
        ..SceneOptions::default()
    };
    let scene = generate_scene(n, 6, Overcompleteness::ONE, 31, options)?;
    let a = temporal_subsample_sensing(m, n, 32)?;
    println!("kept samples (first 10): {:?}", &a.selected_indices()[..10]);

    let y = measure(&scene, &a, 40.0, 33)?.target();
    let config = AcsConfig::default();
    let acs = run_acs(&y, &a, &config)?;
    let gpsr = run_gpsr_baseline(&y, &a, Overcompleteness::ONE, &config)?;

    println!("rmse acs {:.3e}, gpsr {:.3e}", scene_rmse(&scene, &acs)?, scene_rmse(&scene, &gpsr)?);
    println!("sample  truth      acs        gpsr");
    let missing: Vec<usize> = (0..n).filter(|k| !a.selected_indices().contains(k)).take(6).collect();
    for k in missing {
        println!(
            "{k:>6}  {:+.5}  {:+.5}  {:+.5}",
            scene.clean_signal[k], acs.z_hat[k], gpsr.z_hat[k]
        );
    }
    Ok(())
}
