use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harmonic_acs::experiment::{recover_single, run_appendix_suite, run_experiment, ExperimentConfig};

/// Off-grid harmonic recovery by alternating convex search.
#[derive(Parser)]
#[command(name = "acs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover one instance and print (or write) the JSON result.
    Recover(ExperimentArgs),
    /// Monte Carlo sweep; writes results.csv and results.json to --out, CSV to stdout otherwise.
    Bench(ExperimentArgs),
    /// Numerical checks of the convexity analysis; PASS/FAIL lines go to stdout and summary.txt.
    Appendix {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat key = value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    m: Option<String>,
    /// Comma list of even sparsities.
    #[arg(long)]
    sparsity: Option<String>,
    /// Decibels, or `inf`.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<String>,
    /// ACS overcompleteness.
    #[arg(long)]
    q: Option<String>,
    /// Comma list of OC-GPSR overcompleteness values.
    #[arg(long)]
    q_oc: Option<String>,
    /// gaussian or subsample.
    #[arg(long)]
    sensing: Option<String>,
    /// Comma list of acs, gpsr, oc-gpsr.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long)]
    zero_phase: bool,
    #[arg(long)]
    on_grid: bool,
    /// Write 0 in the runtime column so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn resolve(&self) -> harmonic_acs::Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let overrides = [
            ("n", &self.n),
            ("m", &self.m),
            ("sparsity", &self.sparsity),
            ("snr_db", &self.snr_db),
            ("q", &self.q),
            ("q_oc", &self.q_oc),
            ("sensing", &self.sensing),
            ("methods", &self.methods),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("jobs", &self.jobs),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        if self.zero_phase {
            config.zero_phase = true;
        }
        if self.on_grid {
            config.on_grid = true;
        }
        if self.no_timing {
            config.record_timing = false;
        }
        if let Some(out) = &self.out {
            config.out = Some(out.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn run(cli: Cli) -> harmonic_acs::Result<()> {
    match cli.command {
        Command::Recover(args) => {
            let config = args.resolve()?;
            let result = recover_single(&config)?;
            let json = serde_json::to_string_pretty(&result)? + "\n";
            match &config.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join("recovery.json"), json)?;
                }
                None => print!("{json}"),
            }
        }
        Command::Bench(args) => {
            let config = args.resolve()?;
            let output = run_experiment(&config)?;
            match &config.out {
                Some(dir) => {
                    let (csv, json) = output.write_to(dir)?;
                    eprintln!("wrote {} and {}", csv.display(), json.display());
                }
                None => print!("{}", output.to_csv()),
            }
            for row in &output.summary {
                eprintln!(
                    "{:>12} S={:<3} rmse {:.3e}  err {:.3}  located {:.2}  runtime {:.1} ms",
                    row.method, row.sparsity, row.rmse_mean, row.err_mean, row.located_fraction, row.runtime_ms_mean
                );
            }
        }
        Command::Appendix { out } => {
            let report = run_appendix_suite(out.as_deref())?;
            print!("Q = {:.3}\n{}", report.root, report.summary_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_config_error() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
