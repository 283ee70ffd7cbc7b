use annuli::{run_experiment, AlphaSpec, CliResult, Experiment, ExperimentConfig, Overrides, RunOutcome};
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Lattice point statistics in thin elliptic annuli.
///
/// Exit status: 0 all checks passed, 1 some check failed, 2 usage error,
/// 3 budget or I/O failure.
#[derive(Debug, Parser)]
#[command(name = "annuli", version)]
struct Args {
    /// Experiment to run; overrides the config file.
    #[arg(value_enum)]
    experiment: Option<Experiment>,
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Aspect ratio: a number or one of e, sqrt2, two_pow_quarter, golden.
    #[arg(long)]
    alpha: Option<AlphaSpec>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    /// Smoothing parameter; defaults to L³.
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: Args) -> CliResult<RunOutcome> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        experiment: args.experiment,
        alpha: args.alpha,
        t: args.t,
        l: args.l,
        m: args.m,
        n_samples: args.samples,
        seed: args.seed,
        out: args.out,
    });
    run_experiment(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(outcome) => {
            let r = &outcome.report;
            println!("{} (alpha = {}, T = {}, L = {}, M = {})", r.experiment, r.config.alpha, r.config.t, r.config.l, r.config.m);
            for c in &r.checks {
                println!("  [{}] {} = {:.6e} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.bound);
            }
            for p in &outcome.written {
                println!("  wrote {}", p.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("annuli: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
