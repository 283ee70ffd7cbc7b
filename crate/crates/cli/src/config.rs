//! Experiment configuration: TOML file, command-line overrides, resolution.

use crate::error::{CliError, CliResult};
use annuli_core::smoothing::{DEFAULT_GRID, MIN_GRID};
use annuli_core::stats::WeightWindow;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    Variance,
    Moments,
    Distribution,
    Unsmoothing,
    PoissonTruncation,
    ZetaCheck,
    DiophScan,
    Spectrum,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaPreset {
    E,
    Sqrt2,
    TwoPowQuarter,
    Golden,
}

impl AlphaPreset {
    pub fn value(self) -> f64 {
        match self {
            AlphaPreset::E => std::f64::consts::E,
            AlphaPreset::Sqrt2 => std::f64::consts::SQRT_2,
            AlphaPreset::TwoPowQuarter => 2f64.powf(0.25),
            AlphaPreset::Golden => (1.0 + 5f64.sqrt()) / 2.0,
        }
    }
}

/// A literal aspect ratio or a named constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Value(f64),
    Preset(AlphaPreset),
}

impl AlphaSpec {
    pub fn value(self) -> f64 {
        match self {
            AlphaSpec::Value(v) => v,
            AlphaSpec::Preset(p) => p.value(),
        }
    }
}

impl FromStr for AlphaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let preset = match s {
            "e" => Some(AlphaPreset::E),
            "sqrt2" => Some(AlphaPreset::Sqrt2),
            "two_pow_quarter" => Some(AlphaPreset::TwoPowQuarter),
            "golden" => Some(AlphaPreset::Golden),
            _ => None,
        };
        match preset {
            Some(p) => Ok(AlphaSpec::Preset(p)),
            None => s
                .parse::<f64>()
                .map(AlphaSpec::Value)
                .map_err(|_| format!("alpha must be a number or one of e, sqrt2, two_pow_quarter, golden; got {s:?}")),
        }
    }
}

/// Pass/fail thresholds for the checks each experiment reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `|σ²_theory / (8π/(dL)) − 1|`.
    pub variance_formula_rel: f64,
    /// `|Σ′D_n(S)/σ² − 1|` at `|S| = 2`.
    pub diagonal_identity_rel: f64,
    /// Band for the ensemble variance over `8π/(dL)`.
    pub variance_ratio_band: [f64; 2],
    /// `|mean| ≤ k · stderr`.
    pub mean_stderr_multiple: f64,
    pub skewness_max: f64,
    pub kurtosis_band: [f64; 2],
    pub ks_max: f64,
    pub sandwich_eps: f64,
    /// `gap(M/10) / gap(M)` lower bound.
    pub unsmoothing_ratio_min: f64,
    /// `gap(M) ≤ scale/√M`.
    pub unsmoothing_gap_scale: f64,
    /// RMS residual at the smallest over the largest cutoff.
    pub poisson_ratio_min: f64,
    pub zeta_special_abs: f64,
    pub zeta_functional_abs: f64,
    pub zeta_residue_rel: f64,
    pub zeta_methods_abs: f64,
    pub q_symbolic_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            variance_formula_rel: 0.10,
            diagonal_identity_rel: 1e-6,
            variance_ratio_band: [0.85, 1.15],
            mean_stderr_multiple: 3.0,
            skewness_max: 0.2,
            kurtosis_band: [2.6, 3.4],
            ks_max: 0.02,
            sandwich_eps: 0.05,
            unsmoothing_ratio_min: 2.0,
            unsmoothing_gap_scale: 10.0,
            poisson_ratio_min: 3.0,
            zeta_special_abs: 1e-6,
            zeta_functional_abs: 1e-8,
            zeta_residue_rel: 1e-3,
            zeta_methods_abs: 1e-8,
            q_symbolic_rel: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub samples_csv: bool,
    pub plots: bool,
    pub tables: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("annuli-out"), samples_csv: true, plots: true, tables: true }
    }
}

/// Table-valued fields come last so the TOML form stays valid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub alpha: AlphaSpec,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// Defaults to `L³`.
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub kernel_grid: usize,
    pub window: WeightWindow,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Variance,
            alpha: AlphaSpec::Preset(AlphaPreset::E),
            t: 1e4,
            l: 30.0,
            m: None,
            n_samples: 10_000,
            seed: 1,
            kernel_grid: DEFAULT_GRID,
            window: WeightWindow::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Command-line values; any that are set replace the file's.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub alpha: Option<AlphaSpec>,
    pub t: Option<f64>,
    pub l: Option<f64>,
    pub m: Option<f64>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.experiment {
            self.experiment = v;
        }
        if let Some(v) = o.alpha {
            self.alpha = v;
        }
        if let Some(v) = o.t {
            self.t = v;
        }
        if let Some(v) = o.l {
            self.l = v;
        }
        if let Some(v) = o.m {
            self.m = Some(v);
        }
        if let Some(v) = o.n_samples {
            self.n_samples = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.out {
            self.output.dir = v.clone();
        }
    }

    pub fn resolve(&self) -> CliResult<ResolvedConfig> {
        let alpha = self.alpha.value();
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Usage(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("alpha", alpha)?;
        positive("T", self.t)?;
        positive("L", self.l)?;
        let m = self.m.unwrap_or(self.l.powi(3));
        positive("M", m)?;
        if self.n_samples == 0 {
            return Err(CliError::Usage("n_samples must be at least 1".into()));
        }
        if self.kernel_grid < MIN_GRID {
            return Err(CliError::Usage(format!("kernel_grid must be at least {MIN_GRID}")));
        }
        self.window.validate()?;
        let tol = &self.tolerances;
        for band in [tol.variance_ratio_band, tol.kurtosis_band] {
            if !(band[0] <= band[1]) {
                return Err(CliError::Usage(format!("tolerance band {band:?} is empty")));
            }
        }
        if !(tol.sandwich_eps > 0.0 && tol.sandwich_eps < 1.0) {
            return Err(CliError::Usage("sandwich_eps must lie in (0, 1)".into()));
        }
        Ok(ResolvedConfig {
            experiment: self.experiment,
            alpha_spec: self.alpha,
            alpha,
            t: self.t,
            l: self.l,
            m,
            rho: 1.0 / self.l,
            n_samples: self.n_samples,
            seed: self.seed,
            kernel_grid: self.kernel_grid,
            window: self.window,
            tolerances: self.tolerances.clone(),
            output: self.output.clone(),
        })
    }
}

/// The configuration with every default materialized, as embedded in reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub alpha_spec: AlphaSpec,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub rho: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub kernel_grid: usize,
    pub window: WeightWindow,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trip() {
        let c = ExperimentConfig::default();
        let text = c.to_toml();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn full_round_trip() {
        let text = r#"
            experiment = "distribution"
            alpha = 1.7
            T = 5000.0
            L = 20.0
            M = 8000.0
            n_samples = 123
            seed = 99

            [window]
            kind = "smooth_indicator"
            lower = 1.0
            upper = 2.0
            h = 0.01

            [tolerances]
            ks_max = 0.05

            [output]
            dir = "out/x"
            plots = false
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.experiment, Experiment::Distribution);
        assert_eq!(c.alpha, AlphaSpec::Value(1.7));
        assert_eq!(c.m, Some(8000.0));
        assert_eq!(c.tolerances.ks_max, 0.05);
        assert_eq!(c.tolerances.skewness_max, 0.2);
        assert!(!c.output.plots && c.output.samples_csv);
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_toml(), c.to_toml());
    }

    #[test]
    fn presets_and_defaults() {
        let c = ExperimentConfig::from_toml("alpha = \"two_pow_quarter\"\nL = 20.0").unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.alpha, 2f64.powf(0.25));
        assert_eq!(r.m, 8000.0);
        assert_eq!(r.rho, 0.05);
        assert_eq!("golden".parse::<AlphaSpec>().unwrap().value(), (1.0 + 5f64.sqrt()) / 2.0);
        assert_eq!("2.5".parse::<AlphaSpec>().unwrap(), AlphaSpec::Value(2.5));
        assert!("pi".parse::<AlphaSpec>().is_err());
        assert!(ExperimentConfig::from_toml("alpha = \"pi\"").is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn flags_win() {
        let mut c = ExperimentConfig::from_toml("T = 100.0\nseed = 4\nM = 50.0").unwrap();
        c.apply(&Overrides { t: Some(200.0), alpha: Some(AlphaSpec::Value(3.0)), ..Default::default() });
        assert_eq!((c.t, c.seed, c.m), (200.0, 4, Some(50.0)));
        assert_eq!(c.alpha.value(), 3.0);
        c.apply(&Overrides { m: Some(10.0), out: Some("o".into()), ..Default::default() });
        assert_eq!(c.m, Some(10.0));
        assert_eq!(c.output.dir, PathBuf::from("o"));
    }

    #[test]
    fn invalid_values() {
        let mut c = ExperimentConfig { experiment: Experiment::Distribution, n_samples: 0, ..Default::default() };
        assert!(matches!(c.resolve(), Err(CliError::Usage(_))));
        c.n_samples = 10;
        c.t = -1.0;
        assert!(c.resolve().is_err());
        c.t = 1.0;
        c.kernel_grid = 8;
        assert!(c.resolve().is_err());
    }
}
