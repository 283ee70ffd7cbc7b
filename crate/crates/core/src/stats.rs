//! Ensembles of radii under a weight window, empirical moments, the
//! theoretical variance sum and principal-diagonal sums.

use crate::counting::{remainder_sharp, AnnulusParams};
use crate::error::{invalid, Error, Result};
use crate::lattice::{enumerate_vectors, EllipseLattice, Enumeration, Side};
use crate::numeric::sum::{ComplexKahanSum, KahanSum};
use crate::smoothing::{bump, dual_shells, SmoothRemainder, SmoothingKernel};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io;
use std::sync::OnceLock;

/// Density `ω` of the averaging operator `⟨f⟩_T = (1/T) ∫ f(t) ω(t/T) dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightWindow {
    /// Normal density restricted to `x > 0` and renormalized.
    SmoothGaussian { center: f64, width: f64 },
    /// Uniform on `[1, 2]`.
    Indicator12,
    /// `1_[lower, upper] ∗ φ_h` normalized to unit mass, with `φ_h` the bump
    /// rescaled to support `[-h/2, h/2]`.
    SmoothIndicator { lower: f64, upper: f64, h: f64 },
}

impl Default for WeightWindow {
    fn default() -> Self {
        WeightWindow::SmoothGaussian { center: 1.5, width: 0.25 }
    }
}

const BUMP_PEAK: f64 = 0.018_315_638_888_734_18; // φ(0) = e^{-4}

impl WeightWindow {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightWindow::SmoothGaussian { center, width } => {
                if !(width > 0.0 && width.is_finite() && center.is_finite()) {
                    return Err(invalid("gaussian window needs finite center and positive width"));
                }
            }
            WeightWindow::Indicator12 => {}
            WeightWindow::SmoothIndicator { lower, upper, h } => {
                if !(h > 0.0 && lower + h / 2.0 > 0.0 && upper > lower) {
                    return Err(invalid("smooth indicator needs 0 < lower - h/2 < upper and h > 0"));
                }
            }
        }
        Ok(())
    }

    /// Draws `X ~ ω`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            WeightWindow::SmoothGaussian { center, width } => {
                let normal = Normal::new(center, width).expect("validated window");
                loop {
                    let x = normal.sample(rng);
                    if x > 0.0 {
                        return x;
                    }
                }
            }
            WeightWindow::Indicator12 => rng.random_range(1.0..2.0),
            WeightWindow::SmoothIndicator { lower, upper, h } => {
                let u = rng.random_range(lower..upper);
                loop {
                    let b: f64 = rng.random_range(-0.5..0.5);
                    if rng.random::<f64>() * BUMP_PEAK < bump(b) {
                        return u + h * b;
                    }
                }
            }
        }
    }

    /// Density at `x`.
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            WeightWindow::SmoothGaussian { center, width } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let mass = 0.5 * libm::erfc(-center / (width * std::f64::consts::SQRT_2));
                let z = (x - center) / width;
                (-0.5 * z * z).exp() / (width * (2.0 * PI).sqrt() * mass)
            }
            WeightWindow::Indicator12 => {
                if (1.0..=2.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            WeightWindow::SmoothIndicator { lower, upper, h } => {
                // (1/(upper-lower)) ∫_{lower}^{upper} φ_h(x - u) du
                let a = ((x - upper) / h).max(-0.5);
                let b = ((x - lower) / h).min(0.5);
                if a >= b {
                    return 0.0;
                }
                let n = 400;
                let step = (b - a) / n as f64;
                let inner: f64 = (0..=n)
                    .map(|i| {
                        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                        w * bump(a + i as f64 * step)
                    })
                    .sum::<f64>()
                    * step;
                inner / (bump_mass() * (upper - lower))
            }
        }
    }
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let n = 4000;
        let step = 1.0 / n as f64;
        (1..n).map(|i| bump(-0.5 + i as f64 * step)).sum::<f64>() * step
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Sharp,
    Smooth,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub sharp: Option<f64>,
    pub smooth: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SampleEnsemble {
    pub params: AnnulusParams,
    pub window: WeightWindow,
    pub seed: u64,
    pub samples: Vec<Sample>,
}

impl SampleEnsemble {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn ts(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn sharp_values(&self) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.sharp).collect()
    }

    pub fn smooth_values(&self) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.smooth).collect()
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.samples {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws `t = T·X` with `X ~ ω` and evaluates the requested remainders.
///
/// Sample `i` uses its own ChaCha stream, so results do not depend on how
/// the work is split across threads.
pub fn sample_ensemble(
    lat: &EllipseLattice,
    kernel: &SmoothingKernel,
    params: &AnnulusParams,
    window: WeightWindow,
    n_samples: usize,
    seed: u64,
    which: Which,
) -> Result<SampleEnsemble> {
    if n_samples == 0 {
        return Err(invalid("n_samples must be at least 1"));
    }
    window.validate()?;
    let smooth = match which {
        Which::Sharp => None,
        _ => Some(SmoothRemainder::new(lat, kernel, params.L, params.M)),
    };
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let t = params.T * window.sample(&mut rng);
            let sharp = match which {
                Which::Smooth => None,
                _ => Some(remainder_sharp(lat, t, params.rho)?),
            };
            let smooth = smooth.as_ref().map(|s| s.eval(t));
            Ok(Sample { t, sharp, smooth })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleEnsemble { params: *params, window, seed, samples })
}

/// Mean and jackknife standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Mean of `xs` with leave-one-out jackknife standard error.
pub fn jackknife_mean(xs: &[f64]) -> Result<Estimate> {
    let n = xs.len();
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let total = xs.iter().copied().collect::<KahanSum>().value();
    let mean = total / n as f64;
    if n == 1 {
        return Ok(Estimate { mean, stderr: 0.0 });
    }
    let nf = n as f64;
    // θ_i = (total − x_i)/(n − 1); their mean equals the full-sample mean.
    let ss = xs
        .iter()
        .map(|&x| {
            let d = (total - x) / (nf - 1.0) - mean;
            d * d
        })
        .collect::<KahanSum>()
        .value();
    Ok(Estimate { mean, stderr: ((nf - 1.0) / nf * ss).sqrt() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub order: u32,
    pub empirical: f64,
    pub stderr: f64,
    pub gaussian_target: f64,
    pub sigma: f64,
}

/// `m!/(2^{m/2}(m/2)!)` for even `m`, zero for odd `m`.
pub fn gaussian_target(m: u32) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    // (m-1)!! = m!/(2^{m/2}(m/2)!)
    (1..m).step_by(2).map(|k| k as f64).product()
}

/// `⟨(S/σ)^m⟩` over the values.
pub fn empirical_moment(values: &[f64], m: u32, sigma: f64) -> Result<MomentReport> {
    if m == 0 {
        return Err(invalid("moment order must be at least 1"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    let powered: Vec<f64> = values.iter().map(|&x| (x / sigma).powi(m as i32)).collect();
    let est = jackknife_mean(&powered)?;
    Ok(MomentReport {
        order: m,
        empirical: est.mean,
        stderr: est.stderr,
        gaussian_target: gaussian_target(m),
        sigma,
    })
}

/// `8π/(dL)`.
pub fn asymptotic_sigma2(lat: &EllipseLattice, l: f64) -> f64 {
    8.0 * PI / (lat.det_d * l)
}

/// `σ² = (2/(d²π²)) Σ_{k∈Λ*∖0} r(k) sin²(π|k|/L)/|k|³ · ψ̂²(|k|/√M)`.
///
/// Each first-quadrant class stands for `r` vectors, each weighted by `r`.
pub fn theoretical_sigma2(lat: &EllipseLattice, kernel: &SmoothingKernel, l: f64, m: f64) -> f64 {
    let sqrt_m = m.sqrt();
    let sum: KahanSum = dual_shells(lat, m)
        .iter()
        .map(|s| {
            let k = s.norm.to_f64();
            let r = s.r as f64;
            let psi = kernel.eval(k / sqrt_m);
            r * r * (PI * k / l).sin().powi(2) / (k * k * k) * psi * psi
        })
        .collect();
    2.0 / (lat.det_d * lat.det_d * PI * PI) * sum.value()
}

/// Argument of `ψ̂` inside each factor of the principal-diagonal sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelArgument {
    /// `ψ̂(f_j|n|/√M)`: the frequency of the actual dual vector `f_j·n`.
    Harmonic,
    /// `ψ̂(|n|/√M)` in every factor, as in the printed display.
    Primitive,
}

/// Multiplicity prefactor of `D_n(S)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplicityWeight {
    /// `r(n)^{|S|}`: each factor ranges over the `r(n)` sign images of `f_j·n`.
    PerFactor,
    /// A single `r(n)`, as in the printed display.
    Single,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalOptions {
    pub argument: KernelArgument,
    pub multiplicity: MultiplicityWeight,
}

impl Default for DiagonalOptions {
    fn default() -> Self {
        DiagonalOptions { argument: KernelArgument::Harmonic, multiplicity: MultiplicityWeight::PerFactor }
    }
}

/// Largest `f` with `f·|n| < √M`.
fn harmonic_limit(norm: f64, sqrt_m: f64) -> usize {
    let mut f = (sqrt_m / norm).floor() as usize;
    while f > 0 && f as f64 * norm >= sqrt_m {
        f -= 1;
    }
    f
}

/// `h(v) = (−iε/(dπ f^{3/2})) sin(πf|n|/L) ψ̂(·) e^{iπε/4}` for `v = εf`, indexed `v + F`.
fn signed_factor(norm: f64, f_max: usize, lat: &EllipseLattice, kernel: &SmoothingKernel, l: f64, sqrt_m: f64, arg: KernelArgument) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); 2 * f_max + 1];
    let phase = Complex64::from_polar(1.0, PI / 4.0);
    for f in 1..=f_max {
        let ff = f as f64;
        let x = match arg {
            KernelArgument::Harmonic => ff * norm / sqrt_m,
            KernelArgument::Primitive => norm / sqrt_m,
        };
        let a = (PI * ff * norm / l).sin() * kernel.eval(x) / (lat.det_d * PI * ff * ff.sqrt());
        // ε = +1: −i·a·e^{iπ/4};  ε = −1: +i·a·e^{−iπ/4}
        h[f_max + f] = Complex64::new(0.0, -a) * phase;
        h[f_max - f] = Complex64::new(0.0, a) * phase.conj();
    }
    h
}

fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x.re == 0.0 && x.im == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `Σ_{Σ v_j = 0} Π_j h(v_j)` over `k` factors: the k-fold convolution at zero.
fn convolution_at_zero(h: &[Complex64], k: usize) -> Complex64 {
    let f = (h.len() - 1) / 2;
    let mut acc = h.to_vec();
    for _ in 1..k - 1 {
        acc = convolve(&acc, h);
    }
    // acc has offset (k-1)·f; pair index v with h at -v.
    let off = (k - 1) * f;
    let mut total = Complex64::new(0.0, 0.0);
    for (i, &hv) in h.iter().enumerate() {
        let v = i as isize - f as isize;
        let idx = off as isize - v;
        if idx >= 0 && (idx as usize) < acc.len() {
            total += acc[idx as usize] * hv;
        }
    }
    total
}

/// `Σ′_n D_n(S)` over first-quadrant primitive dual vectors, as a complex number.
pub fn diagonal_sum(
    lat: &EllipseLattice,
    kernel: &SmoothingKernel,
    l: f64,
    m: f64,
    s_size: usize,
    opts: DiagonalOptions,
) -> Result<Complex64> {
    if !(1..=6).contains(&s_size) {
        return Err(invalid(format!("|S| must be in 1..=6, got {s_size}")));
    }
    if s_size == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let sqrt_m = m.sqrt();
    let prims = enumerate_vectors(lat, Side::Dual, sqrt_m, Enumeration::QuadrantPrimitive)?;
    let mut prims: Vec<_> = prims.into_iter().filter(|v| v.squared_norm < m).collect();
    prims.sort_by(|a, b| a.squared_norm.total_cmp(&b.squared_norm).then((a.n, a.m).cmp(&(b.n, b.m))));
    let terms: Vec<Complex64> = prims
        .par_iter()
        .map(|v| {
            let norm = v.squared_norm.sqrt();
            let f_max = harmonic_limit(norm, sqrt_m);
            if f_max == 0 {
                return Complex64::new(0.0, 0.0);
            }
            let h = signed_factor(norm, f_max, lat, kernel, l, sqrt_m, opts.argument);
            let r = v.multiplicity() as f64;
            let weight = match opts.multiplicity {
                MultiplicityWeight::PerFactor => r.powi(s_size as i32),
                MultiplicityWeight::Single => r,
            };
            convolution_at_zero(&h, s_size) * (weight / norm.powf(1.5 * s_size as f64))
        })
        .collect();
    let mut acc = ComplexKahanSum::default();
    for t in terms {
        acc.add(t);
    }
    Ok(acc.value())
}

/// `σ^{−|S|} · |Σ′_n D_n(S)|`.
#[allow(non_snake_case)]
pub fn diagonal_D_sum(
    lat: &EllipseLattice,
    kernel: &SmoothingKernel,
    l: f64,
    m: f64,
    s_size: usize,
    sigma: f64,
) -> Result<f64> {
    diagonal_D_sum_with(lat, kernel, l, m, s_size, sigma, DiagonalOptions::default())
}

#[allow(non_snake_case)]
pub fn diagonal_D_sum_with(
    lat: &EllipseLattice,
    kernel: &SmoothingKernel,
    l: f64,
    m: f64,
    s_size: usize,
    sigma: f64,
    opts: DiagonalOptions,
) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    Ok(diagonal_sum(lat, kernel, l, m, s_size, opts)?.norm() / sigma.powi(s_size as i32))
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov–Smirnov distance between the empirical law of `x/σ` and `N(0, 1)`.
pub fn ks_distance(values: &[f64], sigma: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if values.len() < 100 {
        return Err(invalid(format!("KS distance needs at least 100 samples, got {}", values.len())));
    }
    if !(sigma > 0.0) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    let mut z: Vec<f64> = values.iter().map(|&x| x / sigma).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in z.iter().enumerate() {
        let c = normal_cdf(x);
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    Ok(d)
}

/// `⟨(a − b)²⟩` with its standard error.
pub fn mean_squared_difference(a: &[f64], b: &[f64]) -> Result<Estimate> {
    if a.len() != b.len() {
        return Err(invalid("sample arrays differ in length"));
    }
    let sq: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    jackknife_mean(&sq)
}

/// Monte Carlo estimate of `⟨|S(t, 1/L) − S̃(t)|²⟩_T`.
pub fn unsmoothing_gap(
    lat: &EllipseLattice,
    kernel: &SmoothingKernel,
    params: &AnnulusParams,
    window: WeightWindow,
    n_samples: usize,
    seed: u64,
) -> Result<Estimate> {
    let ens = sample_ensemble(lat, kernel, params, window, n_samples, seed, Which::Both)?;
    mean_squared_difference(&ens.sharp_values(), &ens.smooth_values())
}

/// Smooth windows bracketing `1_[1,2]`: `χ± = 1_[1∓h, 2±h] ∗ φ_h` with `h = ε/4`,
/// so that `χ− ≤ 1_[1,2] ≤ χ+` and their masses are `1 ∓ ε/2`.
pub fn sandwich_windows(eps: f64) -> (WeightWindow, WeightWindow) {
    let h = eps / 4.0;
    (
        WeightWindow::SmoothIndicator { lower: 1.0 + h, upper: 2.0 - h, h },
        WeightWindow::SmoothIndicator { lower: 1.0 - h, upper: 2.0 + h, h },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichInterval {
    pub lower: f64,
    pub upper: f64,
    pub p_minus: f64,
    pub p_indicator: f64,
    pub p_plus: f64,
    pub tolerance_low: f64,
    pub tolerance_high: f64,
    pub passed: bool,
}

fn frequency(z: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let n = z.len() as f64;
    let p = z.iter().filter(|&&x| x > lo && x <= hi).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

/// Checks `(1−ε)P₋(A) ≤ P_ind(A) ≤ (1+ε)P₊(A)` for each interval `A`, up to three
/// combined Monte Carlo standard errors. Inputs are already divided by σ.
pub fn sandwich_check(
    minus: &[f64],
    indicator: &[f64],
    plus: &[f64],
    eps: f64,
    intervals: &[(f64, f64)],
) -> Vec<SandwichInterval> {
    intervals
        .iter()
        .map(|&(lo, hi)| {
            let (pm, sm) = frequency(minus, lo, hi);
            let (pi, si) = frequency(indicator, lo, hi);
            let (pp, sp) = frequency(plus, lo, hi);
            let tol_low = 3.0 * (si * si + (1.0 - eps).powi(2) * sm * sm).sqrt();
            let tol_high = 3.0 * (si * si + (1.0 + eps).powi(2) * sp * sp).sqrt();
            let passed = (1.0 - eps) * pm - tol_low <= pi && pi <= (1.0 + eps) * pp + tol_high;
            SandwichInterval {
                lower: lo,
                upper: hi,
                p_minus: pm,
                p_indicator: pi,
                p_plus: pp,
                tolerance_low: tol_low,
                tolerance_high: tol_high,
                passed,
            }
        })
        .collect()
}
