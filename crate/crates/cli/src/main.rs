// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use adiabat::acceptance::DEFAULT_SEED;
use adiabat::fit::GrowthModel;
use adiabat_cli::commands::{self, RunOptions};
use adiabat_cli::error::EXIT_CRITERIA;
use adiabat_cli::report::write_file;
use adiabat_cli::{CliError, CliResult, ExperimentConfig};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "adiabat", version, about = "Superadiabatic and nilpotent evolution experiments")]
struct Cli {
    /// Integrator tolerance; overrides the config value.
    #[arg(long, global = true, env = "ADIABAT_TOL")]
    tol: Option<f64>,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Worker threads for the ε-grid pool (default: all cores).
    #[arg(long, global = true, env = "ADIABAT_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues, multiplicities, gaps and ω over the time grid.
    Decompose { config: PathBuf },
    /// Propagator and block transitions per ε.
    Evolve { config: PathBuf },
    /// Hierarchy deltas, optimal level and approximation error per ε.
    Superadiabatic { config: PathBuf },
    /// Growth law and boundedness verdict of a nilpotent evolution.
    Nilpotent { config: PathBuf },
    /// Run a built-in experiment (intro, nilpotent, two_level).
    Example {
        name: String,
        /// Print the experiment's config instead of running it.
        #[arg(long)]
        emit_config: bool,
    },
    /// Fit an `epsilon,value[,log_scale]` CSV series ("-" reads standard input).
    Fit {
        series: PathBuf,
        #[arg(long, default_value = "exp_inverse_eps")]
        model: String,
    },
    /// Run the acceptance criteria and print one line per criterion.
    Acceptance {
        /// Comma-separated criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        ids: Vec<u8>,
        /// Also write the outcomes as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn emit(report: &adiabat_cli::Report, config: &ExperimentConfig) -> CliResult<()> {
    if config.outputs.is_empty() {
        print!("{}", report.to_json());
        Ok(())
    } else {
        report.write_outputs(config)
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Config("workers: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    }
    let opts = RunOptions {
        tol: cli.tol,
        seed: cli.seed,
    };
    let with_config = |name: &str, path: &PathBuf| -> CliResult<u8> {
        let config = ExperimentConfig::load(path)?;
        let report = commands::run_command(name, &config, &opts)?;
        emit(&report, &config)?;
        Ok(0)
    };
    match &cli.command {
        Command::Decompose { config } => with_config("decompose", config),
        Command::Evolve { config } => with_config("evolve", config),
        Command::Superadiabatic { config } => with_config("superadiabatic", config),
        Command::Nilpotent { config } => with_config("nilpotent", config),
        Command::Example { name, emit_config } => {
            let (config, command) = commands::example_config(name)?;
            if *emit_config {
                print!("{}", config.to_toml());
                return Ok(0);
            }
            let report = commands::run_command(command, &config, &opts)?;
            emit(&report, &config)?;
            Ok(0)
        }
        Command::Fit { series, model } => {
            let model: GrowthModel = model.parse().map_err(|e: adiabat::Error| CliError::Config(e.to_string()))?;
            let points = if series.as_os_str() == "-" {
                commands::read_series(std::io::stdin().lock())?
            } else {
                let f = std::fs::File::open(series).map_err(|source| CliError::Io {
                    path: series.display().to_string(),
                    source,
                })?;
                commands::read_series(f)?
            };
            let fit = commands::run_fit(&points, model)?;
            println!("{}", serde_json::to_string_pretty(&fit).expect("fit serializes"));
            Ok(0)
        }
        Command::Acceptance { ids, json } => {
            let outcomes = commands::run_acceptance(ids, &opts);
            let mut out = std::io::stdout().lock();
            for o in &outcomes {
                let _ = writeln!(out, "{o}");
            }
            let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
            let _ = writeln!(out, "acceptance: {} passed, {} failed", outcomes.len() - failed.len(), failed.len());
            if let Some(path) = json {
                let body = serde_json::to_string_pretty(&outcomes).expect("outcomes serialize");
                write_file(path, &(body + "\n"))?;
            }
            Ok(if failed.is_empty() { 0 } else { EXIT_CRITERIA })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
