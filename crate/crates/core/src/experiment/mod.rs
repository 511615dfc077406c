//! Config-driven experiments: parse a TOML file, fill in defaults, run one of
//! the four experiment families and write CSVs, the resolved config and a run
//! manifest into the output directory.
//!
//! A minimal config:
//!
//! ```toml
//! experiment = "toy"
//! seed = 1
//!
//! [toy]
//! eta = 2.0
//! ```
//!
//! Every default is written back explicitly to `resolved_config.toml`, which
//! parses to the same run.

mod config;
mod run;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::{
    ChainSection, ExperimentConfig, ExperimentKind, FgrPlan, FgrSection, Plan, ProfileKind, RatesPlan,
    SolverFitSection, SolverSection, SpectralPlan, SpectralSection, ToyFitSection, ToyPlan, ToySection, Units,
};
pub use run::{crossover_table, rate_tables, Outcome, GAMMA_IN_CONVENTION};

use crate::output::{Written, MANIFEST_FILE};
use crate::{Error, Result};

pub const RESOLVED_FILE: &str = "resolved_config.toml";

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub experiment: Option<ExperimentKind>,
}

/// Exit status for an error: 2 for bad input, 3 for numerical failure, 4 for I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        e if e.is_validation() => 2,
        Error::Io(_) | Error::Csv(_) => 4,
        _ => 3,
    }
}

/// Parses `text`, applies the overrides and resolves every default.
pub fn parse_config_str(text: &str, overrides: &Overrides) -> Result<(ExperimentConfig, Plan)> {
    let mut cfg = ExperimentConfig::from_toml(text)?;
    if let Some(e) = overrides.experiment {
        cfg.experiment = e;
    }
    if overrides.seed.is_some() {
        cfg.seed = overrides.seed;
    }
    if overrides.threads.is_some() {
        cfg.threads = overrides.threads;
    }
    if overrides.out.is_some() {
        cfg.out = overrides.out.clone();
    }
    let plan = cfg.resolve(text)?;
    Ok((cfg, plan))
}

pub fn parse_config(path: &Path, overrides: &Overrides) -> Result<(ExperimentConfig, Plan)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        key: "--config".into(),
        line: None,
        reason: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config_str(&text, overrides)
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub rows: usize,
    pub quarantined: usize,
}

/// Contents of `manifest.toml`.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub threads: usize,
    pub units: String,
    pub version: String,
    pub platform: String,
    pub resolved_config: String,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub notes: BTreeMap<String, String>,
    pub outputs: Vec<OutputEntry>,
}

/// Runs a resolved config on a pool of `cfg.threads` workers and writes all
/// artifacts into `cfg.out`.
pub fn run(cfg: &ExperimentConfig, plan: &Plan) -> Result<Manifest> {
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| Error::Config {
        key: "out".into(),
        line: None,
        reason: format!("cannot create {}: {e}", out.display()),
    })?;
    std::fs::write(out.join(RESOLVED_FILE), cfg.to_toml())?;
    let threads = cfg.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::Config {
        key: "threads".into(),
        line: None,
        reason: e.to_string(),
    })?;
    let start = Instant::now();
    let outcome = pool.install(|| match plan {
        Plan::Toy(p) => run::toy(p),
        Plan::Fgr(p) => run::fgr(p),
        Plan::Rates(p) => run::rates(p),
        Plan::Spectral(p) => run::spectral(p),
    })?;
    let compute = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let mut outputs = Vec::new();
    for t in &outcome.tables {
        let Written { file, rows, quarantined } = t.write(&out)?;
        outputs.push(OutputEntry { file, rows, quarantined });
    }
    let mut timings = BTreeMap::new();
    timings.insert("compute".to_string(), compute);
    timings.insert("write".to_string(), start.elapsed().as_secs_f64());
    let manifest = Manifest {
        experiment: cfg.experiment.label().to_string(),
        seed: cfg.seed.unwrap_or(0),
        threads: pool.current_num_threads(),
        units: format!("{:?}", cfg.units.unwrap_or_default()).to_lowercase(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        platform: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
        resolved_config: RESOLVED_FILE.to_string(),
        timings,
        notes: outcome.notes.into_iter().collect(),
        outputs,
    };
    let text = toml::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(out.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}

/// Parse, resolve and run.
pub fn execute(path: &Path, overrides: &Overrides) -> Result<Manifest> {
    let (cfg, plan) = parse_config(path, overrides)?;
    log::info!(
        "running `{}` into {}",
        cfg.experiment.label(),
        cfg.out.as_deref().unwrap_or(Path::new("out")).display()
    );
    run(&cfg, &plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let v = Error::Config { key: "x".into(), line: None, reason: String::new() };
        let n = Error::Aliasing(0.5);
        let io = Error::Io(std::io::Error::other("disk"));
        assert_eq!((exit_code(&v), exit_code(&n), exit_code(&io)), (2, 3, 4));
    }
}
