//! One function per experiment. Each returns its results, checks and
//! in-memory artifacts; nothing here touches the filesystem.

use crate::config::{Experiment, ResolvedConfig};
use crate::error::CliResult;
use crate::report::Check;
use crate::svg::{histogram_svg, Curve};
use annuli_core::counting::AnnulusParams;
use annuli_core::diophantine::{
    cf_expansion, gap_scan, sign_product_Q, sign_product_polynomial, sqrt_combination_trend, IntPolynomial,
};
use annuli_core::lattice::{norm_spectrum, Side};
use annuli_core::smoothing::{build_kernel, SmoothingKernel};
use annuli_core::stats::{
    asymptotic_sigma2, diagonal_D_sum, empirical_moment, jackknife_mean, ks_distance, mean_squared_difference,
    sample_ensemble, sandwich_check, sandwich_windows, theoretical_sigma2, Estimate, SampleEnsemble, WeightWindow,
    Which,
};
use annuli_core::zeta::{
    epstein_eval, functional_equation_residual, residue_check, write_zeta_csv, TruncatedSharpFormula, ZetaMethod,
};
use annuli_core::EllipseLattice;
use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;

const CATALAN: f64 = 0.915_965_594_177_219_015_054_603_514_932_384_110_774;
const POISSON_CUTOFFS: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];
const GAP_SCAN_M: [f64; 3] = [1e2, 1e3, 1e4];
const SQRT2_SCAN_M: [f64; 3] = [25.0, 100.0, 400.0];
const SQRT3_SCAN_M: [f64; 3] = [25.0, 50.0, 100.0];
const SANDWICH_CUTS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

pub struct Artifact {
    pub name: &'static str,
    pub contents: Vec<u8>,
}

pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
}

struct Setup {
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    params: AnnulusParams,
}

fn setup(cfg: &ResolvedConfig) -> CliResult<Setup> {
    Ok(Setup {
        lat: EllipseLattice::new(cfg.alpha)?,
        kernel: build_kernel(cfg.kernel_grid)?,
        params: AnnulusParams::new(cfg.t, cfg.l, Some(cfg.m))?,
    })
}

pub fn run(cfg: &ResolvedConfig) -> CliResult<Outcome> {
    match cfg.experiment {
        Experiment::Variance => variance(cfg),
        Experiment::Moments => moments(cfg),
        Experiment::Distribution => distribution(cfg),
        Experiment::Unsmoothing => unsmoothing(cfg),
        Experiment::PoissonTruncation => poisson_truncation(cfg),
        Experiment::ZetaCheck => zeta_check(cfg),
        Experiment::DiophScan => dioph_scan(cfg),
        Experiment::Spectrum => spectrum(cfg),
    }
}

fn smooth_ensemble(cfg: &ResolvedConfig, s: &Setup, window: WeightWindow, seed: u64) -> CliResult<SampleEnsemble> {
    Ok(sample_ensemble(&s.lat, &s.kernel, &s.params, window, cfg.n_samples, seed, Which::Smooth)?)
}

fn samples_artifact(cfg: &ResolvedConfig, ens: &SampleEnsemble, out: &mut Vec<Artifact>) -> CliResult<()> {
    if cfg.output.samples_csv {
        let mut buf = Vec::new();
        ens.write_csv(&mut buf)?;
        out.push(Artifact { name: "samples.csv", contents: buf });
    }
    Ok(())
}

/// Second moment about the sample mean.
fn centered_variance(xs: &[f64]) -> CliResult<Estimate> {
    let mean = jackknife_mean(xs)?.mean;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    Ok(jackknife_mean(&sq)?)
}

fn variance(cfg: &ResolvedConfig) -> CliResult<Outcome> {
    let s = setup(cfg)?;
    let tol = &cfg.tolerances;
    let ens = smooth_ensemble(cfg, &s, cfg.window, cfg.seed)?;
    let xs = ens.smooth_values();
    let mean = jackknife_mean(&xs)?;
    let var = centered_variance(&xs)?;
    let theory = theoretical_sigma2(&s.lat, &s.kernel, cfg.l, cfg.m);
    let asym = asymptotic_sigma2(&s.lat, cfg.l);
    let d2 = diagonal_D_sum(&s.lat, &s.kernel, cfg.l, cfg.m, 2, theory.sqrt())?;

    let checks = vec![
        Check::at_most("mean_vanishing", mean.mean.abs() / mean.stderr, tol.mean_stderr_multiple),
        Check::at_most("variance_formula", (theory / asym - 1.0).abs(), tol.variance_formula_rel),
        Check::at_most("diagonal_identity", (d2 - 1.0).abs(), tol.diagonal_identity_rel),
        Check::within("ensemble_variance", var.mean / asym, tol.variance_ratio_band),
    ];
    let results = json!({
        "mean": mean,
        "variance": var,
        "sigma2_theory": theory,
        "sigma2_asymptotic": asym,
        "variance_over_asymptotic": var.mean / asym,
        "variance_over_theory": var.mean / theory,
        "theory_over_asymptotic": theory / asym,
        "diagonal_sum_2": d2,
    });
    let mut artifacts = Vec::new();
    samples_artifact(cfg, &ens, &mut artifacts)?;
    Ok(Outcome { results, checks, artifacts })
}

fn moments(cfg: &ResolvedConfig) -> CliResult<Outcome> {
    let s = setup(cfg)?;
    let tol = &cfg.tolerances;
    let ens = smooth_ensemble(cfg, &s, cfg.window, cfg.seed)?;
    let xs = ens.smooth_values();
    let theory = theoretical_sigma2(&s.lat, &s.kernel, cfg.l, cfg.m);
    let asym = asymptotic_sigma2(&s.lat, cfg.l);
    let sample = centered_variance(&xs)?.mean;

    let by_sigma = |sigma: f64| -> CliResult<Value> {
        let reports = [3u32, 4, 6]
            .iter()
            .map(|&m| empirical_moment(&xs, m, sigma))
            .collect::<annuli_core::Result<Vec<_>>>()?;
        Ok(json!(reports))
    };
    let m3 = empirical_moment(&xs, 3, theory.sqrt())?;
    let m4 = empirical_moment(&xs, 4, theory.sqrt())?;
    let checks = vec![
        Check::at_most("third_moment", m3.empirical.abs(), tol.skewness_max),
        Check::within("fourth_moment", m4.empirical, tol.kurtosis_band),
    ];
    let results = json!({
        "sigma2_theory": theory,
        "sigma2_asymptotic": asym,
        "sigma2_sample": sample,
        "moments_theory_sigma": by_sigma(theory.sqrt())?,
        "moments_asymptotic_sigma": by_sigma(asym.sqrt())?,
        "moments_sample_sigma": by_sigma(sample.sqrt())?,
    });
    let mut artifacts = Vec::new();
    samples_artifact(cfg, &ens, &mut artifacts)?;
    Ok(Outcome { results, checks, artifacts })
}

fn distribution(cfg: &ResolvedConfig) -> CliResult<Outcome> {
    let s = setup(cfg)?;
    let tol = &cfg.tolerances;
    let ens = smooth_ensemble(cfg, &s, cfg.window, cfg.seed)?;
    let xs = ens.smooth_values();
    let theory = theoretical_sigma2(&s.lat, &s.kernel, cfg.l, cfg.m);
    let asym = asymptotic_sigma2(&s.lat, cfg.l);
    let sample = centered_variance(&xs)?.mean;
    let ks = ks_distance(&xs, asym.sqrt())?;

    let eps = tol.sandwich_eps;
    let (minus, plus) = sandwich_windows(eps);
    let scaled = |w: WeightWindow, k: u64| -> CliResult<Vec<f64>> {
        let e = smooth_ensemble(cfg, &s, w, cfg.seed.wrapping_add(k))?;
        Ok(e.smooth_values().iter().map(|x| x / asym.sqrt()).collect())
    };
    let zm = scaled(minus, 1)?;
    let zi = scaled(WeightWindow::Indicator12, 2)?;
    let zp = scaled(plus, 3)?;
    let mut intervals = vec![(f64::NEG_INFINITY, SANDWICH_CUTS[0])];
    intervals.extend(SANDWICH_CUTS.windows(2).map(|w| (w[0], w[1])));
    intervals.push((SANDWICH_CUTS[SANDWICH_CUTS.len() - 1], f64::INFINITY));
    let sandwich = sandwich_check(&zm, &zi, &zp, eps, &intervals);
    let failed = sandwich.iter().filter(|r| !r.passed).count();

    let checks = vec![
        Check::at_most("ks_distance", ks, tol.ks_max),
        Check::holds("sandwich", failed as f64, "failing intervals = 0", failed == 0),
    ];
    let results = json!({
        "sigma2_theory": theory,
        "sigma2_asymptotic": asym,
        "sigma2_sample": sample,
        "ks_asymptotic_sigma": ks,
        "ks_theory_sigma": ks_distance(&xs, theory.sqrt())?,
        "ks_sample_sigma": ks_distance(&xs, sample.sqrt())?,
        "sandwich_eps": eps,
        "sandwich": sandwich,
    });
    let mut artifacts = Vec::new();
    samples_artifact(cfg, &ens, &mut artifacts)?;
    if cfg.output.plots {
        let z: Vec<f64> = xs.iter().map(|x| x / asym.sqrt()).collect();
        let svg = histogram_svg(
            &z,
            &format!("smoothed remainder / sqrt(8pi/(dL)), alpha = {}, L = {}, n = {}", cfg.alpha, cfg.l, xs.len()),
            &[
                Curve { label: "N(0, 1)", sd: 1.0, color: "#d62728" },
                Curve { label: "N(0, theory/asym)", sd: (theory / asym).sqrt(), color: "#2ca02c" },
            ],
        );
        artifacts.push(Artifact { name: "histogram.svg", contents: svg.into_bytes() });
    }
    Ok(Outcome { results, checks, artifacts })
}

fn unsmoothing(cfg: &ResolvedConfig) -> CliResult<Outcome> {
    let s = setup(cfg)?;
    let tol = &cfg.tolerances;
    let ms = [cfg.m / 10.0, cfg.m];
    let mut gaps = Vec::new();
    let mut last = None;
    for &m in &ms {
        let params = AnnulusParams::new(cfg.t, cfg.l, Some(m))?;
        let ens = sample_ensemble(&s.lat, &s.kernel, &params, cfg.window, cfg.n_samples, cfg.seed, Which::Both)?;
        gaps.push(mean_squared_difference(&ens.sharp_values(), &ens.smooth_values())?);
        last = Some(ens);
    }
    let ratio = gaps[0].mean / gaps[1].mean;
    let bound = tol.unsmoothing_gap_scale / cfg.m.sqrt();
    let checks = vec![
        Check::at_least("gap_ratio", ratio, tol.unsmoothing_ratio_min),
        Check::at_most("gap_size", gaps[1].mean, bound),
    ];
    let results = json!({ "M": ms, "gap": gaps, "ratio": ratio, "gap_bound": bound });
    let mut artifacts = Vec::new();
    if let Some(ens) = last {
        samples_artifact(cfg, &ens, &mut artifacts)?;
    }
    Ok(Outcome { results, checks, artifacts })
}

fn poisson_truncation(cfg: &ResolvedConfig) -> CliResult<Outcome> {
    let lat = EllipseLattice::new(cfg.alpha)?;
    let ts: Vec<f64> = (0..cfg.n_samples)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            cfg.t * cfg.window.sample(&mut rng)
        })
        .collect();
    let mut rms = Vec::new();
    let mut terms = Vec::new();
    let mut reversed_gap: f64 = 0.0;
    for &n in &POISSON_CUTOFFS {
        let f = TruncatedSharpFormula::new(&lat, n)?;
        let res: Vec<f64> = ts.par_iter().map(|&t| f.eval(t).map(|v| v.residual)).collect::<annuli_core::Result<_>>()?;
        rms.push((res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt());
        terms.push(f.num_terms());
        for &t in ts.iter().take(10) {
            reversed_gap = reversed_gap.max((f.approx(t) - f.approx_reversed(t)).abs());
        }
    }
    let ratio = rms[0] / rms[rms.len() - 1];
    let checks = vec![
        Check::at_least("rms_ratio", ratio, cfg.tolerances.poisson_ratio_min),
        Check::at_most("reversed_order", reversed_gap, 1e-9),
    ];
    let results = json!({ "cutoffs": POISSON_CUTOFFS, "terms": terms, "rms_residual": rms, "ratio": ratio });
    Ok(Outcome { results, checks, artifacts: Vec::new() })
}

fn zeta_check(cfg: &ResolvedConfig) -> CliResult<Outcome> {
    let tol = &cfg.tolerances;
    let c = Complex64::new;
    let mut evaluated = Vec::new();

    let z12 = epstein_eval(1.0, c(2.0, 0.0), ZetaMethod::Direct)?;
    evaluated.push(z12);
    let special = PI * PI / 6.0 * CATALAN;
    let fe_point = (2.0, c(2.0, 0.7));
    let fe = functional_equation_residual(fe_point.0, fe_point.1)?;
    let residue = residue_check(2.0, 1e-4)?;

    let g = cfg.alpha * cfg.alpha;
    let mut method_gap: f64 = 0.0;
    for s in [c(1.5, 0.0), c(2.0, 1.0), c(3.0, -2.0), c(2.5, 0.5)] {
        let d = epstein_eval(g, s, ZetaMethod::Direct)?;
        let i = epstein_eval(g, s, ZetaMethod::Integral)?;
        method_gap = method_gap.max((d.value - i.value).norm());
        evaluated.extend([d, i]);
    }
    let fe_lattice = functional_equation_residual(g, c(0.25, 3.0))?;

    let checks = vec![
        Check::at_most("special_value", (z12.value - special).norm(), tol.zeta_special_abs),
        Check::at_most("functional_equation", fe, tol.zeta_functional_abs),
        Check::at_most("residue", residue.relative_error, tol.zeta_residue_rel),
        Check::at_most("methods_agree", method_gap, tol.zeta_methods_abs),
    ];
    let results = json!({
        "z1_at_2": z12.value,
        "zeta2_times_beta2": special,
        "functional_equation": { "gamma": fe_point.0, "s": fe_point.1, "residual": fe },
        "functional_equation_lattice": { "gamma": g, "s": c(0.25, 3.0), "residual": fe_lattice },
        "residue": residue,
        "direct_vs_integral_max": method_gap,
        "values": evaluated,
    });
    let mut artifacts = Vec::new();
    if cfg.output.tables {
        let mut buf = Vec::new();
        write_zeta_csv(&evaluated, &mut buf)?;
        artifacts.push(Artifact { name: "zeta.csv", contents: buf });
    }
    Ok(Outcome { results, checks, artifacts })
}

/// Relative to `|exact|`, or to the sum of the absolute terms when `exact = 0`.
fn q_relative_error(p: &IntPolynomial, z: &[i64], numeric: f64) -> f64 {
    let exact = p.eval_int(z);
    let exact_f = exact.to_string().parse::<f64>().unwrap_or(f64::NAN);
    let scale = if exact_f != 0.0 {
        exact_f.abs()
    } else {
        let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
        let abs = IntPolynomial {
            nvars: p.nvars,
            terms: p.terms.iter().map(|(e, c)| (e.clone(), c.magnitude().clone().into())).collect(),
        };
        abs.eval(&zf).max(1.0)
    };
    (numeric - exact_f).abs() / scale
}

fn dioph_scan(cfg: &ResolvedConfig) -> CliResult<Outcome> {
    let tol = &cfg.tolerances;
    let lat = EllipseLattice::new(cfg.alpha)?;
    let cf_alpha = cf_expansion(cfg.alpha, 40)?;
    let cf_kappa = cf_expansion(lat.kappa, 40)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let q2 = sign_product_polynomial(2)?;
    let closed = IntPolynomial::from_terms(2, &[(1, &[2, 0]), (-2, &[1, 1]), (1, &[0, 2])]);
    let mut mismatches = usize::from(q2 != closed);
    let mut q2_numeric_rel: f64 = 0.0;
    for _ in 0..1000 {
        let (a, b) = (rng.random_range(0..1_000_000i64), rng.random_range(0..1_000_000i64));
        if q2.eval_int(&[a, b]) != BigInt::from(a - b).pow(2) {
            mismatches += 1;
        }
        let q = sign_product_Q(&[a as f64, b as f64])?;
        q2_numeric_rel = q2_numeric_rel.max(q_relative_error(&q2, &[a, b], q.numeric));
    }
    let q3 = sign_product_polynomial(3)?;
    let mut q3_rel: f64 = 0.0;
    for _ in 0..200 {
        let z: Vec<i64> = (0..3).map(|_| rng.random_range(1..=50i64)).collect();
        let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
        q3_rel = q3_rel.max(q_relative_error(&q3, &z, sign_product_Q(&zf)?.numeric));
    }

    let scan = gap_scan(&lat, &GAP_SCAN_M)?;
    let gaps_ok = scan.gaps.iter().all(|&g| g > 0.0 && g.is_finite()) && scan.fit.slope.is_finite();
    let sqrt2 = sqrt_combination_trend(lat.kappa, 2, &SQRT2_SCAN_M)?;
    let sqrt3 = sqrt_combination_trend(lat.kappa, 3, &SQRT3_SCAN_M)?;

    let checks = vec![
        Check::holds("q2_exact", mismatches as f64, "mismatches = 0", mismatches == 0),
        Check::at_most("q3_symbolic", q3_rel, tol.q_symbolic_rel),
        Check::holds("gap_positive_finite_slope", scan.fit.slope, "all gaps > 0, slope finite", gaps_ok),
    ];
    let results = json!({
        "cf_alpha": cf_alpha,
        "cf_kappa": cf_kappa,
        "q2_degree": q2.degree(),
        "q3_degree": q3.degree(),
        "q3_height": q3.height().to_string(),
        "q2_numeric_max_rel": q2_numeric_rel,
        "q3_numeric_max_rel": q3_rel,
        "gap_scan": scan,
        "sqrt_combination_m2": sqrt2,
        "sqrt_combination_m3": sqrt3,
    });
    let mut artifacts = Vec::new();
    if cfg.output.tables {
        let mut buf = Vec::new();
        scan.write_csv(&mut buf)?;
        artifacts.push(Artifact { name: "gaps.csv", contents: buf });
    }
    Ok(Outcome { results, checks, artifacts })
}

/// Primal spectrum up to squared norm `T`.
fn spectrum(cfg: &ResolvedConfig) -> CliResult<Outcome> {
    let lat = EllipseLattice::new(cfg.alpha)?;
    let spec = norm_spectrum(&lat, Side::Primal, cfg.t)?;
    let violations: Vec<Value> = spec
        .entries
        .iter()
        .filter(|e| {
            let expected = match (e.n, e.m) {
                (0, 0) => 1,
                (0, _) | (_, 0) => 2,
                _ => 4,
            };
            e.multiplicity != expected
        })
        .map(|e| json!({ "n": e.n, "m": e.m, "squared_norm": e.squared_norm, "multiplicity": e.multiplicity }))
        .collect();
    let dual = norm_spectrum(&lat, Side::Dual, cfg.m)?;
    let checks = vec![Check::holds(
        "multiplicity_law",
        violations.len() as f64,
        "violations = 0",
        violations.is_empty(),
    )];
    let results = json!({
        "cutoff": cfg.t,
        "distinct_norms": spec.len(),
        "total_count": spec.total_count(),
        "min_gap": spec.min_gap,
        "dual_cutoff": cfg.m,
        "dual_distinct_norms": dual.len(),
        "dual_min_gap": dual.min_gap,
        "violations": violations.iter().take(20).collect::<Vec<_>>(),
    });
    let mut artifacts = Vec::new();
    if cfg.output.tables {
        let mut buf = Vec::new();
        spec.write_csv(&mut buf)?;
        artifacts.push(Artifact { name: "spectrum.csv", contents: buf });
    }
    Ok(Outcome { results, checks, artifacts })
}
