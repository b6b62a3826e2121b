//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test --test acceptance`; set `ACCEPTANCE_TRIALS` to shrink the sweeps.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use harmonic_acs::acs::support_set;
use harmonic_acs::experiment::{
    replay_blob, run_appendix_suite, run_blob, run_experiment, ExperimentConfig, ExperimentOutput,
};
use harmonic_acs::freq_search::SearchOptions;
use harmonic_acs::signals::SensingKind;
use harmonic_acs::Method;
use nalgebra::DVector;

const SPARSITIES: [usize; 6] = [2, 4, 6, 8, 10, 12];

fn trials() -> usize {
    std::env::var("ACCEPTANCE_TRIALS").ok().and_then(|v| v.parse().ok()).unwrap_or(50)
}

fn jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn report(id: u32, name: &str, passed: bool, detail: String) -> bool {
    println!("{} {id} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn sweep(sensing: SensingKind, zero_phase: bool) -> (ExperimentOutput, f64) {
    let config = ExperimentConfig {
        sparsity: SPARSITIES.to_vec(),
        trials: trials(),
        sensing,
        zero_phase,
        jobs: jobs(),
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let out = run_experiment(&config).expect("sweep runs");
    (out, start.elapsed().as_secs_f64())
}

fn mismatch_check(out: &ExperimentOutput) -> (bool, String) {
    let acs = out.summary_for("acs", 6).unwrap();
    let gpsr = out.summary_for("gpsr", 6).unwrap();
    let ratio = gpsr.rmse_mean / acs.rmse_mean;
    let passed = ratio >= 10.0 && acs.located_fraction >= 0.8;
    (
        passed,
        format!(
            "S=6 rmse gpsr/acs = {ratio:.2} (need >= 10), located {:.0}% (need >= 80%)",
            100.0 * acs.located_fraction
        ),
    )
}

fn monotone(out: &ExperimentOutput) -> bool {
    let rows: Vec<_> = out
        .trials
        .iter()
        .filter(|t| t.sparsity == 6)
        .flat_map(|t| t.outcomes.iter().filter(|o| o.method == "acs"))
        .collect();
    let bad = rows.iter().filter(|o| o.cost_increases > 0).count();
    report(
        1,
        "monotone convergence",
        bad == 0,
        format!("{bad} of {} S=6 ACS traces increase beyond 1e-9 relative", rows.len()),
    )
}

fn on_grid_exactness() -> bool {
    let config = ExperimentConfig {
        sparsity: vec![6],
        snr_db: None,
        on_grid: true,
        methods: vec![Method::Acs, Method::Gpsr],
        ..ExperimentConfig::default()
    };
    let count = trials().min(20);
    let tol = SearchOptions::default().resolved_tol(config.n);
    let (mut worst_acs, mut worst_gpsr, mut worst_theta) = (0.0f64, 0.0f64, 0.0f64);
    let mut support_ok = 0;
    for trial in 0..count {
        let run = run_blob(&replay_blob(&config, trial, 6)).unwrap();
        let truth: BTreeSet<usize> = run.scene.tones.iter().map(|t| t.bin).collect();
        let mut all_exact = true;
        for (spec, result) in &run.results {
            let rmse = harmonic_acs::metrics::scene_rmse(&run.scene, result).unwrap();
            let x = DVector::from_vec(result.x_hat.clone());
            let found: BTreeSet<usize> = support_set(&x, 0.1, result.grid_size()).frequencies.into_iter().collect();
            all_exact &= found == truth;
            match spec.method {
                Method::Acs => {
                    worst_acs = worst_acs.max(rmse);
                    worst_theta = result.theta_hat.iter().fold(worst_theta, |m, t| m.max(t.abs()));
                }
                _ => worst_gpsr = worst_gpsr.max(rmse),
            }
        }
        support_ok += usize::from(all_exact);
    }
    let passed = worst_acs <= 1e-6 && worst_gpsr <= 1e-6 && support_ok == count && worst_theta <= tol;
    report(
        2,
        "on-grid exactness",
        passed,
        format!(
            "{count} noiseless trials: max rmse acs {worst_acs:.2e}, gpsr {worst_gpsr:.2e} (need <= 1e-6); \
             exact frequency support {support_ok}/{count}; max |theta| {worst_theta:.2e} vs tol {tol:.2e}"
        ),
    )
}

fn support_dominance(out: &ExperimentOutput) -> bool {
    let mut failures = Vec::new();
    let mut cells = Vec::new();
    for s in SPARSITIES {
        let acs = out.summary_for("acs", s).unwrap().err_mean;
        let oc4 = out.summary_for("oc-gpsr:4", s).unwrap().err_mean;
        let oc8 = out.summary_for("oc-gpsr:8", s).unwrap().err_mean;
        if !(acs < oc4 && acs < oc8) {
            failures.push(s);
        }
        cells.push(format!("S={s} {acs:.3}/{oc4:.3}/{oc8:.3}"));
    }
    report(
        4,
        "support-error dominance",
        failures.is_empty(),
        format!("err acs/oc4/oc8: {}", cells.join(", ")),
    )
}

fn oracles() -> bool {
    let (agree, worst) = common::golden_vs_grid(100);
    let soft = common::soft_threshold_gap(0..5);
    let cost = common::incremental_cost_gap(0..10);
    report(
        7,
        "oracle suites",
        agree == 100 && soft <= 1e-6 && cost <= 1e-9,
        format!(
            "golden vs grid {agree}/100 (worst {worst:.2} of allowed); soft-threshold gap {soft:.1e}; \
             incremental cost gap {cost:.1e}"
        ),
    )
}

fn appendix() -> bool {
    let dir = tempfile::tempdir().unwrap();
    let r = run_appendix_suite(Some(dir.path())).unwrap();
    let root_ok = (r.root - 1.509).abs() <= 1e-3;
    let d0_ok = (63.0 / 5.0..=5.0 * 63.0).contains(&r.max_deviation_delta0);
    let d3_ok = (500.0 / 5.0..=5.0 * 500.0).contains(&r.max_deviation_delta3);
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    report(
        6,
        "appendix numerics",
        root_ok && d0_ok && d3_ok && failed.is_empty(),
        format!(
            "root {:.6}, g(0) {:.3}, deviations {:.1} in [12.6, 315] and {:.1} in [100, 2500]; failing: {}",
            r.root,
            r.g_at_zero,
            r.max_deviation_delta0,
            r.max_deviation_delta3,
            if failed.is_empty() { "none".to_string() } else { failed.join("; ") }
        ),
    )
}

fn determinism() -> bool {
    let base = ExperimentConfig {
        sparsity: vec![4, 8],
        trials: 4,
        record_timing: false,
        ..ExperimentConfig::default()
    };
    let a = run_experiment(&base).unwrap();
    let b = run_experiment(&base).unwrap();
    let c = run_experiment(&ExperimentConfig { jobs: 3, ..base.clone() }).unwrap();
    let same_run = a.to_csv() == b.to_csv() && a.to_json().unwrap() == b.to_json().unwrap();
    let same_jobs = a.to_csv() == c.to_csv() && a.to_json().unwrap() == c.to_json().unwrap();
    report(
        8,
        "determinism",
        same_run && same_jobs,
        format!("repeat identical: {same_run}; jobs 1 vs 3 identical: {same_jobs}"),
    )
}

fn main() {
    // libtest flags such as --nocapture arrive here; `--list` must print nothing
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let (gaussian, g_secs) = sweep(SensingKind::Gaussian, false);
    let mut results = Vec::new();
    results.push(monotone(&gaussian));
    results.push(on_grid_exactness());
    let (ok, detail) = mismatch_check(&gaussian);
    results.push(report(3, "mismatch correction", ok, format!("{detail}; gaussian sweep {g_secs:.0} s")));
    results.push(support_dominance(&gaussian));
    let (subsample, s_secs) = sweep(SensingKind::Subsample, true);
    let (ok, detail) = mismatch_check(&subsample);
    results.push(report(
        5,
        "random temporal sampling",
        ok && s_secs <= 600.0,
        format!("{detail}; full sweep {s_secs:.0} s (need <= 600)"),
    ));
    results.push(appendix());
    results.push(oracles());
    results.push(determinism());
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
}
