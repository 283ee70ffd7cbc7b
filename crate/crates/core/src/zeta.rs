//! The Epstein zeta function `Z_γ(s) = ¼ Σ_{(m,n)≠0} (m² + γn²)^{−s}` and
//! the truncated dual-lattice formula for the sharp count.

use crate::counting::{count_open, count_sharp};
use crate::error::{invalid, Error, Result};
use crate::lattice::{EllipseLattice, Side, DEFAULT_BUDGET};
use crate::numeric::dd::Dd;
use crate::numeric::quad::integrate;
use crate::numeric::special::{gamma, hurwitz_zeta, riemann_zeta};
use crate::numeric::trig::OscillatorySeries;
use crate::smoothing::shells_within;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZetaMethod {
    /// Lattice sum; `Re s > 1` only.
    Direct,
    /// Theta-function integral continuation; any `s ∉ {0, 1}`.
    Integral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaValue {
    pub gamma: f64,
    pub s: Complex64,
    pub value: Complex64,
    pub method: ZetaMethod,
}

pub fn epstein_eval(gamma: f64, s: Complex64, method: ZetaMethod) -> Result<ZetaValue> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma must be positive and finite, got {gamma}")));
    }
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(invalid("s must be finite"));
    }
    let value = match method {
        ZetaMethod::Direct => direct(gamma, s)?,
        ZetaMethod::Integral => via_integral(gamma, s)?,
    };
    Ok(ZetaValue { gamma, s, value, method })
}

fn cpow(x: f64, s: Complex64) -> Complex64 {
    (s * x.ln()).exp()
}

fn recip_gamma(s: Complex64) -> Complex64 {
    if s.re < 0.5 {
        (PI * s).sin() * gamma(1.0 - s) / PI
    } else {
        1.0 / gamma(s)
    }
}

/// `Σ_{m∈ℤ} (m² + c)^{−s}` for `c > 0`: the terms with `m ≤ K` directly and
/// the rest by the binomial series in `c/m²` against Hurwitz zeta values,
/// with `K` chosen so that `c/(K+1)² ≤ 1/4`.
fn row_sum(c: f64, s: Complex64) -> Complex64 {
    let k = (2.0 * c.sqrt()).ceil().max(1.0) as u64;
    let mut head = cpow(c, -s);
    for m in 1..=k {
        head += 2.0 * cpow((m * m) as f64 + c, -s);
    }
    let q = (k + 1) as f64;
    let mut tail = Complex64::new(0.0, 0.0);
    let mut binom = Complex64::new(1.0, 0.0);
    let mut cj = 1.0;
    for j in 0..200 {
        let term = binom * cj * hurwitz_zeta(2.0 * s + 2.0 * j as f64, q);
        tail += term;
        if j >= 2 && term.norm() < 1e-18 * (head.norm() + tail.norm()) {
            break;
        }
        binom = binom * (-s - j as f64) / (j as f64 + 1.0);
        cj *= c;
    }
    head + 2.0 * tail
}

/// Rows `|n| ≤ N` are summed by [`row_sum`]; for `|n| > N` each row equals
/// `√π Γ(s−½)/Γ(s) (γn²)^{½−s}` up to terms of size `e^{−2π√γ|n|}`, chosen
/// below `e^{−50}`.
fn direct(g: f64, s: Complex64) -> Result<Complex64> {
    if !(s.re > 1.0) {
        return Err(Error::Domain(format!("direct summation needs Re s > 1, got {s}")));
    }
    let big_n = ((50.0 / (2.0 * PI * g.sqrt())).ceil() as u64).saturating_sub(1);
    let mut total = 2.0 * riemann_zeta(2.0 * s);
    for n in 1..=big_n {
        total += 2.0 * row_sum(g * (n * n) as f64, s);
    }
    let a = PI.sqrt() * gamma(s - 0.5) * recip_gamma(s);
    total += 2.0 * a * cpow(g, 0.5 - s) * hurwitz_zeta(2.0 * s - 1.0, (big_n + 1) as f64);
    Ok(total / 4.0)
}

/// `2 Σ_{m≥1} e^{−πm²y}`, stopped once a term drops below `1e-16` of the sum.
fn theta_tail(y: f64) -> f64 {
    let mut sum = 0.0;
    let mut m = 1u64;
    loop {
        let term = (-PI * (m * m) as f64 * y).exp();
        sum += term;
        if term < 1e-16 * sum || term == 0.0 {
            break;
        }
        m += 1;
    }
    2.0 * sum
}

/// `ψ_γ(x) = ¼ Σ_{k≠0} e^{−π|k|²x}` from the product of two one-dimensional
/// theta functions, written without the cancelling constant.
pub fn psi(g: f64, x: f64) -> f64 {
    let a = theta_tail(x);
    let b = theta_tail(g * x);
    (a * b + a + b) / 4.0
}

/// Integral of `x^p ψ_γ(x)` over `[1, ∞)`, truncated where the exponential
/// tail bound drops below `1e-18`.
fn psi_moment(g: f64, p: Complex64) -> Complex64 {
    let decay = PI * g.min(1.0);
    let mut x = 2.0;
    loop {
        let rate = decay - p.re.max(0.0) / x;
        if rate > 0.0 && psi(g, x) * x.powf(p.re) / rate < 1e-18 {
            break;
        }
        x *= 1.25;
    }
    integrate(|x| cpow(x, p) * psi(g, x), 1.0, x, 1e-15).0
}

fn via_integral(g: f64, s: Complex64) -> Result<Complex64> {
    if s.norm() == 0.0 || (s - 1.0).norm() == 0.0 {
        return Err(Error::Domain(format!("integral representation is singular at s = {s}")));
    }
    let sg = g.sqrt();
    let first = psi_moment(g, s - 1.0);
    let second = psi_moment(1.0 / g, -s) / sg;
    let poles = 1.0 / (4.0 * sg * (s - 1.0)) - 1.0 / (4.0 * s);
    Ok((first + second + poles) * cpow(PI, s) * recip_gamma(s))
}

/// `χ(s) = π^{2s−1} Γ(1−s)/Γ(s)`.
pub fn chi(s: Complex64) -> Complex64 {
    cpow(PI, 2.0 * s - 1.0) * gamma(1.0 - s) * recip_gamma(s)
}

/// `|Z_γ(s) − χ(s)/√γ · Z_{1/γ}(1−s)|`, both sides by the integral method.
pub fn functional_equation_residual(g: f64, s: Complex64) -> Result<f64> {
    let lhs = epstein_eval(g, s, ZetaMethod::Integral)?.value;
    let rhs = epstein_eval(1.0 / g, 1.0 - s, ZetaMethod::Integral)?.value;
    Ok((lhs - chi(s) / g.sqrt() * rhs).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidueCheck {
    pub gamma: f64,
    pub h: f64,
    /// `h · Z_γ(1 + h)`.
    pub value: f64,
    /// `π/(4√γ)`.
    pub expected: f64,
    pub relative_error: f64,
}

pub fn residue_check(g: f64, h: f64) -> Result<ResidueCheck> {
    if !(h != 0.0 && h.is_finite()) {
        return Err(invalid(format!("offset must be nonzero, got {h}")));
    }
    let z = epstein_eval(g, Complex64::new(1.0 + h, 0.0), ZetaMethod::Integral)?.value;
    let value = h * z.re;
    let expected = PI / (4.0 * g.sqrt());
    Ok(ResidueCheck { gamma: g, h, value, expected, relative_error: (value / expected - 1.0).abs() })
}

#[derive(Serialize)]
struct ZetaRow {
    gamma: f64,
    re_s: f64,
    im_s: f64,
    re_z: f64,
    im_z: f64,
    method: ZetaMethod,
}

pub fn write_zeta_csv<W: io::Write>(values: &[ZetaValue], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for v in values {
        w.serialize(ZetaRow {
            gamma: v.gamma,
            re_s: v.s.re,
            im_s: v.s.im,
            re_z: v.value.re,
            im_z: v.value.im,
            method: v.method,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// `N(t) ≈ πt²/d − (√t/(dπ)) Σ_{0<|k|≤√N} cos(2πt|k| + π/4)/|k|^{3/2}` over the
/// dual lattice, with a hard cutoff and no kernel.
#[derive(Clone, Debug)]
pub struct TruncatedSharpFormula {
    lat: EllipseLattice,
    series: OscillatorySeries,
    pub cutoff: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncatedValue {
    pub t: f64,
    pub approx: f64,
    pub residual: f64,
}

impl TruncatedSharpFormula {
    pub fn new(lat: &EllipseLattice, n: f64) -> Result<Self> {
        Self::with_budget(lat, n, DEFAULT_BUDGET)
    }

    pub fn with_budget(lat: &EllipseLattice, n: f64, budget: u64) -> Result<Self> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(invalid(format!("N must be positive and finite, got {n}")));
        }
        let r2 = Dd::from_f64(n);
        let required = lat.count_in_ball(Side::Dual, r2, false);
        if required > budget {
            return Err(Error::Budget { required, budget });
        }
        let terms = shells_within(lat, r2, false).into_iter().map(|s| {
            let k = s.norm.to_f64();
            // cos(x) = sin(x + π/2)
            (s.norm, 0.375, s.r as f64 / (k * k.sqrt()))
        });
        Ok(TruncatedSharpFormula { lat: lat.clone(), series: OscillatorySeries::new(terms), cutoff: n })
    }

    pub fn num_terms(&self) -> usize {
        self.series.len()
    }

    fn combine(&self, t: f64, sum: f64) -> f64 {
        let d = self.lat.det_d;
        PI * t * t / d - t.sqrt() / (d * PI) * sum
    }

    pub fn approx(&self, t: f64) -> f64 {
        self.combine(t, self.series.eval(t))
    }

    /// Same sum accumulated from the largest `|k|` down.
    pub fn approx_reversed(&self, t: f64) -> f64 {
        self.combine(t, self.series.eval_reversed(t))
    }

    /// Count with jumps taken at their midpoint: half the vectors on `|v| = t`.
    pub fn midpoint_count(&self, t: f64) -> f64 {
        let closed = count_sharp(&self.lat, t);
        let open = count_open(&self.lat, t);
        open as f64 + (closed - open) as f64 / 2.0
    }

    pub fn eval(&self, t: f64) -> Result<TruncatedValue> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("t must be positive and finite, got {t}")));
        }
        let approx = self.approx(t);
        Ok(TruncatedValue { t, approx, residual: self.midpoint_count(t) - approx })
    }
}

pub fn truncated_sharp_formula(lat: &EllipseLattice, t: f64, n: f64) -> Result<TruncatedValue> {
    TruncatedSharpFormula::new(lat, n)?.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    const CATALAN: f64 = 0.915_965_594_177_219_015_054_603_514_932_384_110_774;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_integers() {
        let want = PI * PI / 6.0 * CATALAN;
        assert!((want - 1.506_703_0).abs() < 1e-7);
        for method in [ZetaMethod::Direct, ZetaMethod::Integral] {
            let z = epstein_eval(1.0, c(2.0, 0.0), method).unwrap().value;
            assert!((z - want).norm() < 1e-10, "{method:?}: {z}");
        }
        // ζ(3)β(3), β(3) = π³/32
        let want = 1.202_056_903_159_594_3 * PI.powi(3) / 32.0;
        let z = epstein_eval(1.0, c(3.0, 0.0), ZetaMethod::Direct).unwrap().value;
        assert!((z - want).norm() < 1e-12, "{z}");
    }

    #[test]
    fn direct_against_brute_force() {
        // γ = 2, s = 3: the lattice sum converges fast enough to brute force
        let mut sum = 0.0;
        let r = 400i64;
        for m in -r..=r {
            for n in -r..=r {
                if m != 0 || n != 0 {
                    sum += ((m * m) as f64 + 2.0 * (n * n) as f64).powi(-3);
                }
            }
        }
        let z = epstein_eval(2.0, c(3.0, 0.0), ZetaMethod::Direct).unwrap().value;
        assert!((z.re - sum / 4.0).abs() < 1e-9, "{z} vs {}", sum / 4.0);
    }

    #[test]
    fn value_at_zero_is_minus_quarter() {
        let z = epstein_eval(E, c(1e-9, 0.0), ZetaMethod::Integral).unwrap().value;
        assert!((z.re + 0.25).abs() < 1e-7, "{z}");
    }

    #[test]
    fn functional_equation() {
        for (g, s) in [(2.0, c(2.0, 0.7)), (1.0, c(0.3, 4.0)), (E * E, c(-1.5, 0.2))] {
            let r = functional_equation_residual(g, s).unwrap();
            assert!(r <= 1e-8, "{g} {s}: {r}");
        }
    }

    #[test]
    fn residue() {
        let r = residue_check(2.0, 1e-4).unwrap();
        assert!((r.expected - 0.555_36).abs() < 1e-5);
        assert!(r.relative_error < 1e-3, "{r:?}");
    }

    #[test]
    fn domain_errors() {
        assert!(epstein_eval(2.0, c(0.0, 0.0), ZetaMethod::Integral).is_err());
        assert!(epstein_eval(2.0, c(1.0, 0.0), ZetaMethod::Integral).is_err());
        assert!(epstein_eval(2.0, c(1.0, 0.0), ZetaMethod::Direct).is_err());
        assert!(epstein_eval(2.0, c(0.5, 3.0), ZetaMethod::Direct).is_err());
        assert!(epstein_eval(-1.0, c(2.0, 0.0), ZetaMethod::Direct).is_err());
        assert!(epstein_eval(2.0, c(1.0, 1e-3), ZetaMethod::Integral).is_ok());
    }

    #[test]
    fn csv_export() {
        let vals = [epstein_eval(1.0, c(2.0, 0.5), ZetaMethod::Direct).unwrap()];
        let mut buf = Vec::new();
        write_zeta_csv(&vals, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("gamma,re_s,im_s,re_z,im_z,method\n"));
        assert!(text.trim_end().ends_with(",direct"));
    }

    #[test]
    fn truncated_formula_basics() {
        let lat = EllipseLattice::new(2f64.sqrt()).unwrap();
        // dual norms start at min(1, 1/2); nothing below 0.4
        let f = TruncatedSharpFormula::new(&lat, 0.4).unwrap();
        assert_eq!(f.num_terms(), 0);
        let v = f.eval(50.3).unwrap();
        assert_eq!(v.approx, PI * 50.3 * 50.3 / lat.det_d);
        assert_eq!(v.residual, count_sharp(&lat, 50.3) as f64 - v.approx);

        let f = TruncatedSharpFormula::new(&lat, 1e4).unwrap();
        for t in [100.3, 150.0, 199.9] {
            assert!((f.approx(t) - f.approx_reversed(t)).abs() < 1e-9);
        }
        assert!(TruncatedSharpFormula::new(&lat, 0.0).is_err());
        assert!(TruncatedSharpFormula::with_budget(&lat, 1e4, 100).is_err());
    }

    #[test]
    fn midpoint_convention() {
        let lat = EllipseLattice::new(1.0).unwrap();
        let f = TruncatedSharpFormula::new(&lat, 1.0).unwrap();
        // |v| = 1 has four vectors: open count 1, plus 2
        assert_eq!(f.midpoint_count(1.0), 3.0);
        assert_eq!(f.midpoint_count(1.5), 9.0);
    }

    #[test]
    fn residual_grows_slower_than_t() {
        let lat = EllipseLattice::new(2f64.sqrt()).unwrap();
        let f = TruncatedSharpFormula::new(&lat, 100.0).unwrap();
        let worst = |t0: f64| {
            (0..200)
                .map(|i| f.eval(t0 + i as f64 * 0.0137).unwrap().residual.abs())
                .fold(0.0, f64::max)
                / t0
        };
        let (a, b) = (worst(100.0), worst(10_000.0));
        assert!(b < a, "{a} {b}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn direct_matches_integral(re in 1.5f64..3.0, im in -5.0f64..5.0, gi in 0usize..3) {
            let g = [1.0, 2.0, E][gi];
            let s = c(re, im);
            let a = epstein_eval(g, s, ZetaMethod::Direct).unwrap().value;
            let b = epstein_eval(g, s, ZetaMethod::Integral).unwrap().value;
            prop_assert!((a - b).norm() < 1e-8, "{} vs {}", a, b);
        }
    }
}
