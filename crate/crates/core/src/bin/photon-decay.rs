use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use photon_decay::experiment::{execute, exit_code, ExperimentKind, Overrides};

/// Run one experiment from a TOML config.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores (overrides `threads`).
    #[arg(long)]
    threads: Option<usize>,
    /// toy, fgr, rates or spectral (overrides `experiment`).
    #[arg(long)]
    experiment: Option<ExperimentKind>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let overrides = Overrides { out: cli.out, seed: cli.seed, threads: cli.threads, experiment: cli.experiment };
    match execute(&cli.config, &overrides) {
        Ok(m) => {
            for o in &m.outputs {
                println!("{} ({} rows, {} quarantined)", o.file, o.rows, o.quarantined);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
