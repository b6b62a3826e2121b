//! Seeded Monte Carlo sweep with CSV/JSON output and replay of a single trial.
//!
//! `cargo run --release --example monte_carlo_bench -- [out_dir]`

use harmonic_acs::experiment::{replay_trial, run_experiment, ExperimentConfig};

fn main() -> harmonic_acs::Result<()> {
    let config = ExperimentConfig::from_kv_str(
        "n = 128\n\
         m = 64\n\
         sparsity = 2, 6\n\
         trials = 5\n\
         q_oc = 4\n\
         record_timing = false\n",
    )?;
    let out = run_experiment(&config)?;

    for row in &out.summary {
        println!(
            "{:>10} S={:<2} rmse {:.3e} +- {:.1e}  err {:.3}  located {:.0}%",
            row.method,
            row.sparsity,
            row.rmse_mean,
            row.rmse_std,
            row.err_mean,
            100.0 * row.located_fraction
        );
    }

    let record = &out.trials[3];
    let again = replay_trial(record)?;
    println!(
        "trial {} S={} replayed: acs rmse {:.6e} vs recorded {:.6e}",
        record.trial, record.sparsity, again[0].rmse, record.outcomes[0].rmse
    );

    if let Some(dir) = std::env::args().nth(1) {
        let (csv, json) = out.write_to(dir.as_ref())?;
        println!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}
