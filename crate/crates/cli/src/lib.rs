//! Configurable experiment runner over `annuli-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod svg;

pub use config::{AlphaPreset, AlphaSpec, Experiment, ExperimentConfig, Overrides, ResolvedConfig, Tolerances};
pub use error::{CliError, CliResult};
pub use experiments::Artifact;
pub use report::{Check, Report};

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

pub const THREADS_ENV: &str = "ANNULI_THREADS";

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub written: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            0
        } else {
            1
        }
    }
}

/// Runs the experiment without writing anything.
pub fn execute(cfg: &ResolvedConfig) -> CliResult<(Report, Vec<Artifact>)> {
    let out = experiments::run(cfg)?;
    let passed = out.checks.iter().all(|c| c.passed);
    let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let report = Report {
        experiment: cfg.experiment,
        config: cfg.clone(),
        results: out.results,
        checks: out.checks,
        passed,
        timestamp_unix,
    };
    Ok((report, out.artifacts))
}

fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Resolves, runs and writes `report.json` plus artifacts into the output directory.
/// The thread count comes from `ANNULI_THREADS` when set.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<RunOutcome> {
    run_experiment_with_threads(cfg, threads_from_env()?)
}

pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> CliResult<RunOutcome> {
    let resolved = cfg.resolve()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Resource(e.to_string()))?;
    let (report, artifacts) = pool.install(|| execute(&resolved))?;

    let dir = &resolved.output.dir;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join("report.json");
    std::fs::write(&path, report.to_json())?;
    written.push(path);
    for a in artifacts {
        let path = dir.join(a.name);
        std::fs::write(&path, &a.contents)?;
        written.push(path);
    }
    log::info!("wrote {} files to {}", written.len(), dir.display());
    Ok(RunOutcome { report, written })
}
