//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria that fail report their measured values and the process still
//! exits 0; only errors (a run that could not complete) exit non-zero.

use annuli::{
    run_experiment_with_threads, AlphaPreset, AlphaSpec, Experiment, ExperimentConfig, Report,
};
use annuli_core::counting::count_sharp;
use annuli_core::stats::WeightWindow;
use annuli_core::EllipseLattice;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

struct Suite {
    passed: usize,
    failed: usize,
}

impl Suite {
    fn record(&mut self, id: &str, what: &str, passed: bool, detail: String) {
        println!("[{}] {id} {what}: {detail}", if passed { "PASS" } else { "FAIL" });
        if passed {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }
}

fn out_dir(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("annuli-acceptance-{}-{tag}", std::process::id()))
}

fn config(experiment: Experiment, alpha: AlphaSpec, t: f64, l: f64, m: Option<f64>, n: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig { experiment, alpha, t, l, m, n_samples: n, ..ExperimentConfig::default() };
    cfg.output.dir = out_dir(&format!("{experiment}-{t}-{l}-{n}"));
    cfg.output.samples_csv = false;
    cfg
}

fn run(cfg: &ExperimentConfig) -> Report {
    let started = Instant::now();
    let outcome = run_experiment_with_threads(cfg, None)
        .unwrap_or_else(|e| panic!("{} run did not complete: {e}", cfg.experiment));
    let _ = std::fs::remove_dir_all(&cfg.output.dir);
    eprintln!("  ({} finished in {:.1?})", cfg.experiment, started.elapsed());
    outcome.report
}

fn check(report: &Report, name: &str) -> (bool, f64, String) {
    let c = report.check(name).unwrap_or_else(|| panic!("report lacks check {name}"));
    (c.passed, c.value, c.bound.clone())
}

fn describe(report: &Report, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let parts: Vec<String> = names
        .iter()
        .map(|n| {
            let (p, v, b) = check(report, n);
            ok &= p;
            format!("{n} = {v:.6} ({b})")
        })
        .collect();
    (ok, parts.join("; "))
}

fn brute_force(alpha: f64, t: f64) -> u64 {
    let nmax = t.floor() as i64;
    let mmax = (t / alpha).floor() as i64;
    let mut count = 0;
    for n in -nmax..=nmax {
        for m in -mmax..=mmax {
            let (x, y) = (n as f64, alpha * m as f64);
            if x * x + y * y <= t * t {
                count += 1;
            }
        }
    }
    count
}

fn main() {
    let mut suite = Suite { passed: 0, failed: 0 };
    let e = AlphaSpec::Preset(AlphaPreset::E);
    let sqrt2 = AlphaSpec::Preset(AlphaPreset::Sqrt2);

    // C1
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut mismatches = Vec::new();
    for _ in 0..100 {
        let alpha = rng.random_range(0.3..3.0);
        let t = rng.random_range(1.0..200.0);
        let lat = EllipseLattice::new(alpha).expect("valid alpha");
        let (got, want) = (count_sharp(&lat, t), brute_force(alpha, t));
        if got != want {
            mismatches.push((alpha, t, got, want));
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    suite.record(
        "C1",
        "oracle counting",
        mismatches.is_empty() && elapsed < 10.0,
        format!("{} mismatches in 100 cases, {elapsed:.2} s {mismatches:?}", mismatches.len()),
    );

    // C2
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [AlphaSpec::Preset(AlphaPreset::TwoPowQuarter), e] {
        let r = run(&config(Experiment::Spectrum, alpha, 1e4, 30.0, None, 1));
        let (p, v, _) = check(&r, "multiplicity_law");
        ok &= p;
        parts.push(format!("alpha = {:.6}: {v} violations over {} norms", alpha.value(), r.results["distinct_norms"]));
    }
    suite.record("C2", "multiplicity law", ok, parts.join("; "));

    // C3
    let r = run(&config(Experiment::Variance, e, 1e4, 20.0, Some(8000.0), 200_000));
    let (p, v, b) = check(&r, "mean_vanishing");
    suite.record(
        "C3",
        "mean vanishing",
        p,
        format!("|mean|/stderr = {v:.4} ({b}), mean = {}", r.results["mean"]),
    );

    // C4, C5
    let r = run(&config(Experiment::Variance, e, 1e4, 30.0, None, 100_000));
    let (p, detail) = describe(&r, &["variance_formula", "diagonal_identity"]);
    suite.record(
        "C4",
        "variance formula",
        p,
        format!(
            "{detail}; sigma2_theory = {}, 8pi/(dL) = {}",
            r.results["sigma2_theory"], r.results["sigma2_asymptotic"]
        ),
    );
    let (p, v, b) = check(&r, "ensemble_variance");
    suite.record(
        "C5",
        "ensemble variance",
        p,
        format!("Var/(8pi/(dL)) = {v:.4} ({b}); Var/sigma2_theory = {}", r.results["variance_over_theory"]),
    );

    // C6
    let r = run(&config(Experiment::Moments, e, 1e4, 30.0, None, 100_000));
    let (p, detail) = describe(&r, &["third_moment", "fourth_moment"]);
    suite.record("C6", "gaussian moments", p, detail);

    // C7
    let r = run(&config(Experiment::Distribution, e, 1e4, 30.0, None, 100_000));
    let (p, detail) = describe(&r, &["ks_distance", "sandwich"]);
    suite.record(
        "C7",
        "distribution",
        p,
        format!(
            "{detail}; KS with sigma_theory = {:.4}, with sample sigma = {:.4}",
            r.results["ks_theory_sigma"].as_f64().unwrap_or(f64::NAN),
            r.results["ks_sample_sigma"].as_f64().unwrap_or(f64::NAN)
        ),
    );

    // C8
    let r = run(&config(Experiment::Unsmoothing, sqrt2, 5000.0, 20.0, Some(1e4), 20_000));
    let (p, detail) = describe(&r, &["gap_ratio", "gap_size"]);
    suite.record("C8", "unsmoothing", p, detail);

    // C9
    let mut cfg = config(Experiment::PoissonTruncation, sqrt2, 100.0, 30.0, None, 1000);
    cfg.window = WeightWindow::Indicator12;
    let r = run(&cfg);
    let (p, detail) = describe(&r, &["rms_ratio", "reversed_order"]);
    suite.record("C9", "truncated Poisson formula", p, format!("{detail}; rms = {}", r.results["rms_residual"]));

    // C10
    let r = run(&config(Experiment::ZetaCheck, e, 1e4, 30.0, None, 1));
    let (p, detail) = describe(&r, &["special_value", "functional_equation", "residue", "methods_agree"]);
    suite.record("C10", "Epstein zeta", p, detail);

    // C11
    let r = run(&config(Experiment::DiophScan, e, 1e4, 30.0, None, 1));
    let (p, detail) = describe(&r, &["q2_exact", "q3_symbolic", "gap_positive_finite_slope"]);
    suite.record("C11", "diophantine suite", p, format!("{detail}; gaps = {}", r.results["gap_scan"]["gaps"]));

    // C12
    let mut contents = Vec::new();
    for threads in [1, 4] {
        let mut cfg = config(Experiment::Distribution, e, 1e4, 30.0, None, 5000);
        cfg.output.dir = out_dir("determinism");
        let outcome = run_experiment_with_threads(&cfg, Some(threads)).expect("determinism run");
        let _ = std::fs::remove_dir_all(&cfg.output.dir);
        contents.push(outcome.report.numeric_content());
    }
    suite.record(
        "C12",
        "determinism",
        contents[0] == contents[1],
        format!("report content with 1 and 4 threads: {} bytes, identical = {}", contents[0].len(), contents[0] == contents[1]),
    );

    println!("{} passed, {} failed", suite.passed, suite.failed);
}
