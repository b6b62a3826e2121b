//! Monte Carlo sweeps, single recoveries and the appendix suite, with their
//! on-disk formats.
//!
//! Configuration is a flat `key = value` text file (`#` starts a comment).
//! Every key can also be set through [`ExperimentConfig::set`], which is what
//! command-line overrides go through.
//!
//! | key | value |
//! |-----|-------|
//! | `n`, `m` | signal length, measurement count |
//! | `sparsity` | comma list of even `S` |
//! | `snr_db` | decibels, or `inf` for noiseless |
//! | `q` | ACS overcompleteness |
//! | `q_oc` | comma list of OC-GPSR overcompleteness values |
//! | `q_scene` | grid the scene bins are drawn on |
//! | `sensing` | `gaussian` or `subsample` |
//! | `methods` | comma list of `acs`, `gpsr`, `oc-gpsr` |
//! | `trials`, `seed`, `jobs` | integers |
//! | `zero_phase`, `on_grid`, `exclude_dc_bin`, `record_timing` | `true` / `false` |
//! | `lambda_rule` | `fixed` or `every-iteration` |
//! | `out` | output directory |
//!
//! Per-trial seeds are `derive_seed(seed, [trial, S, stream])`, so results do
//! not depend on scheduling or on `jobs`. With `record_timing = false` the
//! runtime column is written as 0 and output files are byte-for-byte
//! reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acs::{run_acs, run_gpsr_baseline, AcsConfig, LambdaRule, Method, RecoveryResult};
use crate::appendix::{
    approx_cost_compare, bin_grid, convex_half_width, convexity_residual, convexity_root, g_k, g_second_deriv_limit,
    g_second_differences, h_k, max_deviation, AppendixProbe, CostComparisonRow, EntryDistribution,
};
use crate::dictionary::Overcompleteness;
use crate::error::{Error, Result};
use crate::metrics::{all_tones_located, extract_tones, normalized_rmse, support_err, truth_tones};
use crate::signals::{derive_seed, generate_scene, measure, HarmonicScene, SceneOptions, SensingKind, SensingSpec};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "trial,method,sparsity,rmse,err,runtime_ms,outer_iters,converged";

const STREAM_SCENE: u64 = 0;
const STREAM_SENSING: u64 = 1;
const STREAM_NOISE: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub sparsity: Vec<usize>,
    /// `None` is noiseless.
    pub snr_db: Option<f64>,
    pub q_acs: Overcompleteness,
    pub q_oc: Vec<Overcompleteness>,
    pub q_scene: Overcompleteness,
    pub sensing: SensingKind,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub master_seed: u64,
    pub zero_phase: bool,
    pub on_grid: bool,
    pub exclude_dc_bin: bool,
    /// Worker threads; not serialized because results do not depend on it.
    #[serde(skip, default = "default_jobs")]
    pub jobs: usize,
    pub record_timing: bool,
    pub lambda_rule: LambdaRule,
    /// Output directory; not serialized so results do not depend on where they land.
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn default_jobs() -> usize {
    1
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 256,
            m: 128,
            sparsity: vec![6],
            snr_db: Some(40.0),
            q_acs: Overcompleteness::ONE,
            q_oc: vec![Overcompleteness::integer(4).expect("4 is valid"), Overcompleteness::integer(8).expect("8 is valid")],
            q_scene: Overcompleteness::ONE,
            sensing: SensingKind::Gaussian,
            methods: vec![Method::Acs, Method::Gpsr, Method::OcGpsr],
            trials: 50,
            master_seed: 1,
            zero_phase: false,
            on_grid: false,
            exclude_dc_bin: true,
            jobs: 1,
            record_timing: true,
            lambda_rule: LambdaRule::Fixed,
            out: None,
        }
    }
}

fn parse_list<T>(field: &str, value: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::config(field, "empty list"));
    }
    items
        .into_iter()
        .map(|s| parse(s).map_err(|e| Error::config(field, e.to_string())))
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(field: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e: T::Err| Error::config(field, format!("cannot parse `{}`: {e}", value.trim())))
}

fn parse_bool(field: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::config(field, format!("expected true or false, got `{other}`"))),
    }
}

impl ExperimentConfig {
    /// Parses a flat `key = value` file on top of the defaults.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(&format!("line {}", lineno + 1), "expected `key = value`"))?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        Self::from_kv_str(&text)
    }

    /// Sets one field from its textual form. Dashes in `key` count as underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        let field = key.as_str();
        match field {
            "n" => self.n = parse_scalar(field, value)?,
            "m" => self.m = parse_scalar(field, value)?,
            "sparsity" => self.sparsity = parse_list(field, value, |s| parse_scalar(field, s))?,
            "snr_db" => {
                self.snr_db = match value.trim() {
                    "inf" | "+inf" | "none" => None,
                    v => Some(parse_scalar(field, v)?),
                }
            }
            "q" | "q_acs" => self.q_acs = parse_scalar(field, value)?,
            "q_oc" => self.q_oc = parse_list(field, value, str::parse)?,
            "q_scene" => self.q_scene = parse_scalar(field, value)?,
            "sensing" => self.sensing = parse_scalar(field, value)?,
            "methods" => self.methods = parse_list(field, value, str::parse)?,
            "trials" => self.trials = parse_scalar(field, value)?,
            "seed" | "master_seed" => self.master_seed = parse_scalar(field, value)?,
            "jobs" => self.jobs = parse_scalar(field, value)?,
            "zero_phase" => self.zero_phase = parse_bool(field, value)?,
            "on_grid" => self.on_grid = parse_bool(field, value)?,
            "exclude_dc_bin" => self.exclude_dc_bin = parse_bool(field, value)?,
            "record_timing" => self.record_timing = parse_bool(field, value)?,
            "lambda_rule" => self.lambda_rule = parse_scalar(field, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            _ => return Err(Error::config(field, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config("n", "must be at least 2"));
        }
        if self.m == 0 {
            return Err(Error::config("m", "must be positive"));
        }
        if self.sensing == SensingKind::Subsample && self.m > self.n {
            return Err(Error::config("m", format!("subsampling keeps at most n = {} samples", self.n)));
        }
        let scene_grid = self
            .q_scene
            .grid_size(self.n)
            .map_err(|e| Error::config("q_scene", e.to_string()))?;
        self.q_acs
            .grid_size(self.n)
            .map_err(|e| Error::config("q", e.to_string()))?;
        if self.methods.contains(&Method::OcGpsr) {
            if self.q_oc.is_empty() {
                return Err(Error::config("q_oc", "oc-gpsr needs at least one value"));
            }
            for q in &self.q_oc {
                q.grid_size(self.n).map_err(|e| Error::config("q_oc", e.to_string()))?;
            }
        }
        if self.sparsity.is_empty() {
            return Err(Error::config("sparsity", "empty list"));
        }
        let bins = scene_grid / 2 - usize::from(self.exclude_dc_bin);
        for &s in &self.sparsity {
            if s == 0 || s % 2 != 0 {
                return Err(Error::config("sparsity", format!("{s} is not a positive even integer")));
            }
            if s / 2 > bins {
                return Err(Error::config("sparsity", format!("{s} needs {} bins, only {bins} exist", s / 2)));
            }
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::config("snr_db", "must be finite or `inf`"));
            }
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "empty list"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(Error::config("jobs", "must be at least 1"));
        }
        Ok(())
    }

    pub fn acs_config(&self) -> AcsConfig {
        AcsConfig {
            q: self.q_acs,
            lambda_rule: self.lambda_rule,
            ..AcsConfig::default()
        }
    }

    pub fn scene_options(&self) -> SceneOptions {
        SceneOptions {
            exclude_dc_bin: self.exclude_dc_bin,
            zero_phase: self.zero_phase,
            on_grid: self.on_grid,
        }
    }

    /// Methods in run order; `oc-gpsr` expands to one entry per `q_oc` value.
    pub fn method_specs(&self) -> Vec<MethodSpec> {
        let mut specs = Vec::new();
        for &method in &self.methods {
            match method {
                Method::Acs => specs.push(MethodSpec { method, q: self.q_acs }),
                Method::Gpsr => specs.push(MethodSpec {
                    method,
                    q: Overcompleteness::ONE,
                }),
                Method::OcGpsr => specs.extend(self.q_oc.iter().map(|&q| MethodSpec { method, q })),
            }
        }
        specs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    pub q: Overcompleteness,
}

impl MethodSpec {
    /// `acs`, `gpsr`, or `oc-gpsr:Q`.
    pub fn label(&self) -> String {
        match self.method {
            Method::OcGpsr => format!("oc-gpsr:{}", self.q),
            m => m.name().to_string(),
        }
    }

    pub fn run(&self, y: &DVector<f64>, a: &crate::signals::SensingOperator, config: &AcsConfig) -> Result<RecoveryResult> {
        match self.method {
            Method::Acs => run_acs(y, a, &AcsConfig { q: self.q, ..*config }),
            Method::Gpsr | Method::OcGpsr => run_gpsr_baseline(y, a, self.q, config),
        }
    }
}

/// Everything needed to regenerate one trial and rerun its methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBlob {
    pub n: usize,
    pub sparsity: usize,
    pub q_scene: Overcompleteness,
    pub scene_options: SceneOptions,
    pub scene_seed: u64,
    pub sensing: SensingSpec,
    pub snr_db: Option<f64>,
    pub noise_seed: u64,
    pub lambda_rule: LambdaRule,
    pub methods: Vec<MethodSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: String,
    pub rmse: f64,
    pub err: f64,
    /// Every true tone has an estimate inside its window.
    pub all_located: bool,
    pub support_size: usize,
    pub runtime_ms: f64,
    pub outer_iters: usize,
    pub converged: bool,
    /// Relative increases of the cost trace beyond `1e-9`.
    pub cost_increases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub sparsity: usize,
    pub scene_seed: u64,
    pub replay: ReplayBlob,
    pub outcomes: Vec<MethodOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub sparsity: usize,
    pub trials: usize,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub err_mean: f64,
    pub err_std: f64,
    pub runtime_ms_mean: f64,
    pub runtime_ms_std: f64,
    pub located_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentOutput {
    pub fn summary_for(&self, method: &str, sparsity: usize) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.method == method && r.sparsity == sparsity)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for record in &self.trials {
            for o in &record.outcomes {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    record.trial, o.method, record.sparsity, o.rmse, o.err, o.runtime_ms, o.outer_iters, o.converged
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `results.csv` and `results.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv = dir.join("results.csv");
        let json = dir.join("results.json");
        fs::write(&csv, self.to_csv())?;
        fs::write(&json, self.to_json()?)?;
        Ok((csv, json))
    }
}

/// Seed stream `stream` of trial `trial` at sparsity `s`.
pub fn trial_seed(master: u64, trial: usize, s: usize, stream: u64) -> u64 {
    derive_seed(master, &[trial as u64, s as u64, stream])
}

pub fn replay_blob(config: &ExperimentConfig, trial: usize, s: usize) -> ReplayBlob {
    ReplayBlob {
        n: config.n,
        sparsity: s,
        q_scene: config.q_scene,
        scene_options: config.scene_options(),
        scene_seed: trial_seed(config.master_seed, trial, s, STREAM_SCENE),
        sensing: SensingSpec {
            kind: config.sensing,
            rows: config.m,
            cols: config.n,
            seed: trial_seed(config.master_seed, trial, s, STREAM_SENSING),
        },
        snr_db: config.snr_db,
        noise_seed: trial_seed(config.master_seed, trial, s, STREAM_NOISE),
        lambda_rule: config.lambda_rule,
        methods: config.method_specs(),
    }
}

/// Scene, operator and measurement of a replay blob, plus every method's result.
pub struct TrialRun {
    pub scene: HarmonicScene,
    pub noise_sigma: f64,
    pub results: Vec<(MethodSpec, RecoveryResult)>,
}

pub fn run_blob(blob: &ReplayBlob) -> Result<TrialRun> {
    let scene = generate_scene(blob.n, blob.sparsity, blob.q_scene, blob.scene_seed, blob.scene_options)?;
    let a = blob.sensing.build()?;
    let measurement = measure(&scene, &a, blob.snr_db.unwrap_or(f64::INFINITY), blob.noise_seed)?;
    let y = measurement.target();
    let acs = AcsConfig {
        lambda_rule: blob.lambda_rule,
        ..AcsConfig::default()
    };
    let results = blob
        .methods
        .iter()
        .map(|spec| Ok((*spec, spec.run(&y, &a, &acs)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialRun {
        scene,
        noise_sigma: measurement.noise_sigma,
        results,
    })
}

fn outcome(scene: &HarmonicScene, spec: &MethodSpec, result: &RecoveryResult, record_timing: bool) -> Result<MethodOutcome> {
    let truth = truth_tones(scene)?;
    let estimate = extract_tones(result, result.kappa);
    let cost_increases = result
        .cost_trace
        .windows(2)
        .filter(|w| w[1] > w[0] + 1e-9 * w[0].abs())
        .count();
    Ok(MethodOutcome {
        method: spec.label(),
        rmse: normalized_rmse(&scene.clean_signal, &result.z_hat)?,
        err: support_err(&truth, &estimate),
        all_located: all_tones_located(&truth, &estimate),
        support_size: result.x_hat.iter().filter(|v| v.abs() >= result.kappa && **v != 0.0).count(),
        runtime_ms: if record_timing { result.wall_time_ms } else { 0.0 },
        outer_iters: result.outer_iterations,
        converged: result.converged,
        cost_increases,
    })
}

/// Reruns a recorded trial and returns fresh outcomes (runtime reported as 0).
pub fn replay_trial(record: &TrialRecord) -> Result<Vec<MethodOutcome>> {
    let run = run_blob(&record.replay)?;
    run.results
        .iter()
        .map(|(spec, result)| outcome(&run.scene, spec, result, false))
        .collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

fn summarize(config: &ExperimentConfig, trials: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for &s in &config.sparsity {
        for spec in config.method_specs() {
            let label = spec.label();
            let outcomes: Vec<&MethodOutcome> = trials
                .iter()
                .filter(|t| t.sparsity == s)
                .flat_map(|t| t.outcomes.iter().filter(|o| o.method == label))
                .collect();
            let col = |f: fn(&MethodOutcome) -> f64| outcomes.iter().map(|o| f(o)).collect::<Vec<_>>();
            let (rmse_mean, rmse_std) = mean_std(&col(|o| o.rmse));
            let (err_mean, err_std) = mean_std(&col(|o| o.err));
            let (runtime_ms_mean, runtime_ms_std) = mean_std(&col(|o| o.runtime_ms));
            let located = outcomes.iter().filter(|o| o.all_located).count();
            rows.push(SummaryRow {
                method: label,
                sparsity: s,
                trials: outcomes.len(),
                rmse_mean,
                rmse_std,
                err_mean,
                err_std,
                runtime_ms_mean,
                runtime_ms_std,
                located_fraction: located as f64 / outcomes.len() as f64,
            });
        }
    }
    rows
}

/// Runs every (sparsity, trial) pair on `jobs` worker threads.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let tasks: Vec<(usize, usize)> = config
        .sparsity
        .iter()
        .flat_map(|&s| (0..config.trials).map(move |t| (s, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let trials = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(s, trial)| {
                let replay = replay_blob(config, trial, s);
                let run = run_blob(&replay)?;
                let outcomes = run
                    .results
                    .iter()
                    .map(|(spec, result)| outcome(&run.scene, spec, result, config.record_timing))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TrialRecord {
                    trial,
                    sparsity: s,
                    scene_seed: replay.scene_seed,
                    replay,
                    outcomes,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = summarize(config, &trials);
    Ok(ExperimentOutput {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        trials,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelledResult {
    pub method: String,
    pub outcome: MethodOutcome,
    pub result: RecoveryResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleRecovery {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub replay: ReplayBlob,
    pub scene: HarmonicScene,
    pub noise_sigma: f64,
    pub results: Vec<LabelledResult>,
}

/// One instance: trial 0 at the first sparsity in the config.
pub fn recover_single(config: &ExperimentConfig) -> Result<SingleRecovery> {
    config.validate()?;
    let replay = replay_blob(config, 0, config.sparsity[0]);
    let run = run_blob(&replay)?;
    let results = run
        .results
        .into_iter()
        .map(|(spec, result)| {
            Ok(LabelledResult {
                method: spec.label(),
                outcome: outcome(&run.scene, &spec, &result, config.record_timing)?,
                result,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SingleRecovery {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        replay,
        scene: run.scene,
        noise_sigma: run.noise_sigma,
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub root: f64,
    pub g_at_zero: f64,
    pub max_deviation_delta0: f64,
    pub max_deviation_delta3: f64,
    pub min_approx_delta3: f64,
    pub checks: Vec<AppendixCheck>,
}

impl AppendixReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        s
    }
}

/// Sample size and seed of the two cost-comparison tables.
pub const APPENDIX_N: usize = 1024;
pub const APPENDIX_M: usize = 512;
pub const APPENDIX_SEED: u64 = 0;

/// Single sine at `f = 0.2` measured by an `M x N` standard normal operator, no noise.
pub fn appendix_probe(true_amp: f64, est_amp: f64) -> AppendixProbe {
    AppendixProbe {
        n: APPENDIX_N,
        m: APPENDIX_M,
        sigma_a: 1.0,
        sigma_noise: 0.0,
        distribution: EntryDistribution::Normal,
        true_amp,
        est_amp,
        frequency: 0.2,
    }
}

fn within(value: f64, lo: f64, hi: f64) -> bool {
    value >= lo && value <= hi
}

/// Fraction of `seeds` for which both cost tables bottom out at `theta = 0`
/// (within one grid step) on a `points`-point grid.
pub fn argmin_agreement(probe: &AppendixProbe, points: usize, seeds: std::ops::Range<u64>) -> Result<(usize, usize)> {
    let grid = bin_grid(probe.n, points);
    let step = grid[1] - grid[0];
    let argmin = |rows: &[CostComparisonRow], f: fn(&CostComparisonRow) -> f64| {
        rows.iter()
            .min_by(|a, b| f(a).total_cmp(&f(b)))
            .map(|r| r.theta)
            .unwrap_or(f64::NAN)
    };
    let mut agree = 0;
    let mut total = 0;
    for seed in seeds {
        let rows = approx_cost_compare(probe, &grid, seed)?;
        let e = argmin(&rows, |r| r.exact);
        let a = argmin(&rows, |r| r.approx);
        total += 1;
        if e.abs() <= step * (1.0 + 1e-9) && a.abs() <= step * (1.0 + 1e-9) {
            agree += 1;
        }
    }
    Ok((agree, total))
}

/// Evaluates the appendix claims and, when `out_dir` is given, writes
/// `g_profile.csv`, `cost_delta0.csv`, `cost_delta3.csv`, `root.txt` and
/// `summary.txt` there.
pub fn run_appendix_suite(out_dir: Option<&Path>) -> Result<AppendixReport> {
    let n = APPENDIX_N;
    let nf = n as f64;
    let matched = appendix_probe(1.0, 1.0);
    let mismatched = appendix_probe(4.0, 1.0);
    let mut checks = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        checks.push(AppendixCheck {
            name: name.to_string(),
            passed,
            detail,
        })
    };

    let root = convexity_root();
    check(
        "convexity root",
        (root - 1.509).abs() <= 1e-3 && convexity_residual(root).abs() <= 1e-10,
        format!("Q = {root:.10}, residual {:.1e}", convexity_residual(root)),
    );

    let delta = mismatched.delta();
    let g0 = g_k(0.0, &mismatched);
    let on_lattice = AppendixProbe {
        frequency: 0.25,
        ..mismatched
    };
    let g0_exact = g_k(0.0, &on_lattice);
    let half_energy = nf / 2.0 * delta * delta;
    check(
        "g(0) = N/2 delta^2",
        (g0_exact - half_energy).abs() <= 1e-9 * half_energy && (g0 - half_energy).abs() <= 1e-3 * half_energy,
        format!("{g0_exact} at f = 0.25, {g0:.3} at f = 0.2, target {half_energy}"),
    );

    let grid = bin_grid(n, 201);
    let table0 = approx_cost_compare(&matched, &grid, APPENDIX_SEED)?;
    let table3 = approx_cost_compare(&mismatched, &grid, APPENDIX_SEED)?;
    let order0 = 2f64.sqrt() * nf / (APPENDIX_M as f64).sqrt();
    let order3 = 2f64.sqrt() * 8.5 * nf / (APPENDIX_M as f64).sqrt();
    let dev0 = max_deviation(&table0);
    let dev3 = max_deviation(&table3);
    check(
        "delta = 0 deviation order",
        within(dev0, order0 / 5.0, 5.0 * order0),
        format!("max |exact - approx| = {dev0:.2}, bracket [{:.1}, {:.1}]", order0 / 5.0, 5.0 * order0),
    );
    check(
        "delta = 3 deviation order",
        within(dev3, order3 / 5.0, 5.0 * order3),
        format!("max |exact - approx| = {dev3:.2}, bracket [{:.1}, {:.1}]", order3 / 5.0, 5.0 * order3),
    );
    let min_exact0 = table0.iter().map(|r| r.exact).fold(f64::INFINITY, f64::min);
    check(
        "delta = 0 minimum exact cost",
        min_exact0 <= 1e-20,
        format!("{min_exact0:e}"),
    );
    let min_approx3 = table3.iter().map(|r| r.approx).fold(f64::INFINITY, f64::min);
    check(
        "delta = 3 minimum approx cost",
        (min_approx3 - half_energy).abs() <= 1e-3 * half_energy,
        format!("{min_approx3:.3}, target {half_energy}"),
    );

    let mut convex = true;
    let mut widths = Vec::new();
    for size in [256usize, 1024] {
        let edge = 1.0 / (3.018 * size as f64);
        let thetas: Vec<f64> = (0..=100).map(|i| edge * (2.0 * i as f64 - 100.0) / 100.0).collect();
        for (x, x_hat) in [(1.0, 1.0), (4.0, 1.0)] {
            let p = AppendixProbe {
                n: size,
                ..appendix_probe(x, x_hat)
            };
            let d2 = g_second_differences(&p, &thetas, 1e-3 / size as f64);
            convex &= d2.iter().all(|&v| v >= -1e-6 * size as f64);
            let (plus, minus) = convex_half_width(&p, 2000);
            widths.push(format!("N={size} x={x} x_hat={x_hat}: +{plus:.4}/N -{minus:.4}/N"));
        }
    }
    check(
        "second differences on |theta| <= 1/(3.018N)",
        convex,
        format!("required half-width {:.4}/N; measured {}", 1.0 / 3.018, widths.join("; ")),
    );

    let (agree, total) = argmin_agreement(&mismatched, 41, 0..20)?;
    check(
        "argmin at the true frequency",
        agree == total,
        format!("{agree}/{total} seeds, 41-point grid"),
    );

    let report = AppendixReport {
        root,
        g_at_zero: g0,
        max_deviation_delta0: dev0,
        max_deviation_delta3: dev3,
        min_approx_delta3: min_approx3,
        checks,
    };

    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        let mut profile = String::from("theta,g_delta0,g_delta3,h_delta0,h_delta3,g2_limit\n");
        let wide: Vec<f64> = (0..=400).map(|i| (-2.0 + i as f64 / 100.0) / nf).collect();
        for &t in &wide {
            let g2 = g_second_deriv_limit(t, n)?;
            let _ = writeln!(
                profile,
                "{t},{},{},{},{},{g2}",
                g_k(t, &matched),
                g_k(t, &mismatched),
                h_k(t, &matched),
                h_k(t, &mismatched)
            );
        }
        fs::write(dir.join("g_profile.csv"), profile)?;
        for (name, table) in [("cost_delta0.csv", &table0), ("cost_delta3.csv", &table3)] {
            let mut s = String::from("theta,exact,approx,deviation,predicted_order\n");
            for r in table.iter() {
                let _ = writeln!(s, "{},{},{},{},{}", r.theta, r.exact, r.approx, r.deviation, r.predicted_order);
            }
            fs::write(dir.join(name), s)?;
        }
        fs::write(dir.join("root.txt"), format!("Q = {root:.3}\nQ_full = {root:.13}\n"))?;
        fs::write(dir.join("summary.txt"), report.summary_text())?;
    }
    Ok(report)
}
