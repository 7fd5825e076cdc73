use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use log::error;
use nzssig::experiment::{run, ExperimentConfig};

/// Solve a two-player impulse game described by a TOML experiment config.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Experiment config (TOML).
    config: Option<PathBuf>,
    /// Override `output.dir`.
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    /// Override the Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// More log output; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let Some(path) = cli.config else {
        let _ = Cli::command().print_help();
        return ExitCode::from(1);
    };
    let mut cfg = match ExperimentConfig::load(&path) {
        Ok(cfg) => cfg,
        Err(e) => {
            error!("{e}");
            if std::fs::read_to_string(&path).is_ok_and(|t| t.trim().is_empty()) {
                let _ = Cli::command().print_help();
            }
            return ExitCode::from(1);
        }
    };
    if let Some(dir) = cli.output_dir {
        cfg.output.dir = dir;
    }
    if let (Some(seed), Some(mc)) = (cli.seed, cfg.monte_carlo.as_mut()) {
        mc.seed = seed;
    }
    match run(&cfg) {
        Ok(reports) => {
            for r in &reports {
                println!(
                    "M = {:>5}  {:<15} iterations = {:>4}  R = {:.3e}",
                    r.m,
                    format!("{:?}", r.result.status),
                    r.result.iterations,
                    r.result.residual()
                );
            }
            println!("artifacts written to {}", cfg.output.dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
