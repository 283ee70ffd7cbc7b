//! Diophantine diagnostics: continued fractions, minimal square-root
//! combinations, the sign-product polynomial and dual norm gaps.
//!
//! Nothing here certifies a Diophantine property. Every exponent is an
//! empirical log-log slope over a finite range.

use crate::error::{invalid, Error, Result};
use crate::lattice::{norm_spectrum_with_budget, EllipseLattice, Side, DEFAULT_BUDGET};
use crate::numeric::dd::{two_prod, Dd};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io;

pub const MAX_CF_DEPTH: usize = 60;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("log-log fit needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(invalid("log-log fit needs positive finite data"));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("log-log fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(LogLogFit { slope, intercept: my - slope * mx, points: xs.len() })
}

/// Continued fraction of `η` and the empirical exponent `K` in `|η − p/q| ≫ q^{−K}`.
#[derive(Clone, Debug, Serialize)]
pub struct DiophantineReport {
    pub eta: f64,
    pub requested_depth: usize,
    pub depth: usize,
    pub truncated: bool,
    pub partial_quotients: Vec<u64>,
    pub convergents: Vec<(u64, u64)>,
    /// `|η − p_k/q_k|` for each convergent.
    pub errors: Vec<f64>,
    pub exponent_estimate: Option<f64>,
}

/// The f64 value of `eta` is an exact dyadic rational; its expansion is
/// computed exactly and cut where it stops describing `eta` itself,
/// i.e. once `q_k q_{k+1}` reaches a quarter of `1/ulp(eta)`.
pub fn cf_expansion(eta: f64, depth: usize) -> Result<DiophantineReport> {
    if !(eta > 0.0 && eta < 2f64.powi(53)) {
        return Err(invalid(format!("eta must lie in (0, 2^53), got {eta}")));
    }
    if depth == 0 || depth > MAX_CF_DEPTH {
        return Err(invalid(format!("depth must be in 1..={MAX_CF_DEPTH}, got {depth}")));
    }
    let (num, den) = dyadic(eta);
    let ulp = f64::from_bits(eta.to_bits() + 1) - eta;
    let limit = 0.25 / ulp;

    let (mut a, mut b) = (num, den);
    let mut quotients = Vec::new();
    let mut convergents: Vec<(u64, u64)> = Vec::new();
    let (mut p2, mut q2, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut truncated = false;
    while quotients.len() < depth && !b.is_zero() {
        let (qt, r) = a.div_rem(&b);
        let Some(ak) = qt.to_u64() else {
            truncated = true;
            break;
        };
        let (Some(p), Some(q)) = (next_term(ak, p2, p1), next_term(ak, q2, q1)) else {
            truncated = true;
            break;
        };
        if !quotients.is_empty() && (q1 as f64) * (q as f64) > limit {
            truncated = true;
            break;
        }
        quotients.push(ak);
        convergents.push((p, q));
        (p2, q2, p1, q1) = (p1, q1, p, q);
        a = b;
        b = r;
    }
    if truncated {
        log::warn!(
            "continued fraction of {eta} truncated at depth {} of {depth}: beyond double precision",
            quotients.len()
        );
    }
    let errors: Vec<f64> = convergents.iter().map(|&(p, q)| convergent_error(eta, p, q)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = convergents
        .iter()
        .zip(&errors)
        .filter(|&(&(_, q), &e)| q >= 2 && e > 0.0)
        .map(|(&(_, q), &e)| (q as f64, e))
        .unzip();
    let exponent_estimate = log_log_fit(&xs, &ys).ok().map(|f| -f.slope);
    Ok(DiophantineReport {
        eta,
        requested_depth: depth,
        depth: quotients.len(),
        truncated,
        partial_quotients: quotients,
        convergents,
        errors,
        exponent_estimate,
    })
}

fn next_term(a: u64, prev2: u64, prev1: u64) -> Option<u64> {
    a.checked_mul(prev1)?.checked_add(prev2)
}

fn dyadic(x: f64) -> (BigInt, BigInt) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    let mant = BigInt::from(mant);
    if e >= 0 {
        (mant << e as usize, BigInt::one())
    } else {
        let g = mant.gcd(&(BigInt::one() << (-e) as usize));
        let den = (BigInt::one() << (-e) as usize) / &g;
        (mant / g, den)
    }
}

/// `|η − p/q|` with `qη` formed exactly.
fn convergent_error(eta: f64, p: u64, q: u64) -> f64 {
    if q as f64 >= 2f64.powi(53) || p as f64 >= 2f64.powi(53) {
        return (eta - p as f64 / q as f64).abs();
    }
    let (hi, lo) = two_prod(q as f64, eta);
    let diff = Dd::new(hi, lo) - Dd::from_f64(p as f64);
    diff.to_f64().abs() / q as f64
}

/// Integer polynomial in `nvars` variables, keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct IntPolynomial {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, BigInt>,
}

impl IntPolynomial {
    fn constant(nvars: usize, c: i64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(vec![0; nvars], BigInt::from(c));
        }
        IntPolynomial { nvars, terms }
    }

    /// Build from `(coefficient, exponents)` pairs; zero coefficients dropped.
    pub fn from_terms(nvars: usize, terms: &[(i64, &[u32])]) -> Self {
        let mut p = IntPolynomial::constant(nvars, 0);
        for &(c, e) in terms {
            assert_eq!(e.len(), nvars);
            let entry = p.terms.entry(e.to_vec()).or_insert_with(BigInt::zero);
            *entry += c;
        }
        p.terms.retain(|_, c| !c.is_zero());
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *terms.entry(e).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        IntPolynomial { nvars: self.nvars, terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Height `h(P)`: the largest absolute coefficient.
    pub fn height(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
    }

    pub fn eval_int(&self, x: &[i64]) -> BigInt {
        assert_eq!(x.len(), self.nvars);
        let mut total = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (&xi, &ei) in x.iter().zip(e) {
                t *= BigInt::from(xi).pow(ei);
            }
            total += t;
        }
        total
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars);
        let mut total = Dd::ZERO;
        for (e, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (&xi, &ei) in x.iter().zip(e) {
                t *= xi.powi(ei as i32);
            }
            total = total + Dd::from_f64(t);
        }
        total.to_f64()
    }
}

/// `Π_{δ∈{±1}^m} Σ_j δ_j √z_j` expanded as a polynomial in the `z_j`.
///
/// The product is first expanded in the square roots `s_j`; every exponent
/// must come out even, otherwise the result is not a polynomial in `z`
/// and an error is returned.
pub fn sign_product_polynomial(m: usize) -> Result<IntPolynomial> {
    if !(2..=4).contains(&m) {
        return Err(invalid(format!("sign product needs 2 ≤ m ≤ 4, got {m}")));
    }
    let mut prod = IntPolynomial::constant(m, 1);
    for mask in 0..(1u32 << m) {
        let factor: Vec<(i64, Vec<u32>)> = (0..m)
            .map(|j| {
                let mut e = vec![0; m];
                e[j] = 1;
                (if mask >> j & 1 == 1 { -1 } else { 1 }, e)
            })
            .collect();
        let refs: Vec<(i64, &[u32])> = factor.iter().map(|(c, e)| (*c, e.as_slice())).collect();
        prod = prod.mul(&IntPolynomial::from_terms(m, &refs));
    }
    let mut terms = BTreeMap::new();
    for (e, c) in prod.terms {
        if e.iter().any(|x| x % 2 == 1) {
            return Err(Error::Domain(format!("odd power {e:?} survives in the sign product")));
        }
        terms.insert(e.iter().map(|x| x / 2).collect(), c);
    }
    Ok(IntPolynomial { nvars: m, terms })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignProduct {
    pub z: Vec<f64>,
    pub numeric: f64,
    /// Value of the symbolic expansion, for `m ≤ 3`.
    pub symbolic: Option<f64>,
}

/// Numeric sign product of `√z_j` over all `2^m` sign vectors.
#[allow(non_snake_case)]
pub fn sign_product_Q(z: &[f64]) -> Result<SignProduct> {
    let m = z.len();
    if !(2..=4).contains(&m) {
        return Err(invalid(format!("sign product needs 2 ≤ m ≤ 4, got {m}")));
    }
    if z.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(invalid("sign product needs finite z_j ≥ 0"));
    }
    let roots: Vec<f64> = z.iter().map(|v| v.sqrt()).collect();
    let mut numeric = 1.0;
    for mask in 0..(1u32 << m) {
        let s: f64 = roots
            .iter()
            .enumerate()
            .map(|(j, r)| if mask >> j & 1 == 1 { -r } else { *r })
            .sum();
        numeric *= s;
    }
    let symbolic = if m <= 3 { Some(sign_product_polynomial(m)?.eval(z)) } else { None };
    Ok(SignProduct { z: z.to_vec(), numeric, symbolic })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqrtCombination {
    pub min_value: f64,
    /// `(a_j, b_j)` with `z_j = a_j² + η b_j²`.
    pub tuple: Vec<(u64, u64)>,
    pub signs: Vec<i8>,
}

const ZERO_TOL: f64 = 1e-12;
const RECHECK: f64 = 1e-8;

pub fn min_sqrt_combination(eta: f64, m: usize, mmax: f64) -> Result<SqrtCombination> {
    min_sqrt_combination_with_budget(eta, m, mmax, DEFAULT_BUDGET)
}

/// Smallest nonzero `|Σ ε_j √z_j|` over `z_j = a_j² + η b_j² ≤ Mmax`, `z_j > 0`.
///
/// Values of `z` are merged on exact double-double equality, tuples are
/// multisets of those values, and combinations that cancel term by term or
/// fall below `1e-12` count as zero. Candidates below `1e-8` are
/// recomputed in double-double before they are compared.
pub fn min_sqrt_combination_with_budget(
    eta: f64,
    m: usize,
    mmax: f64,
    budget: u64,
) -> Result<SqrtCombination> {
    if !(2..=4).contains(&m) {
        return Err(invalid(format!("m must be 2, 3 or 4, got {m}")));
    }
    if !(eta > 0.0 && eta.is_finite()) || !(mmax > 0.0 && mmax.is_finite()) {
        return Err(invalid("eta and Mmax must be positive and finite"));
    }
    let zs = distinct_norms(eta, mmax);
    let n = zs.len() as u64;
    let tuples = (0..m as u64).fold(1u64, |acc, i| acc.saturating_mul(n + i) / (i + 1));
    let required = tuples.saturating_mul(1 << (m - 1));
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    if zs.is_empty() {
        return Err(invalid(format!("no z ≤ {mmax}")));
    }
    let best = (0..zs.len())
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![first; m];
            let mut best: Option<Candidate> = None;
            loop {
                for mask in 0..(1u32 << (m - 1)) {
                    let signs: Vec<i8> =
                        (0..m).map(|j| if j > 0 && mask >> (j - 1) & 1 == 1 { -1 } else { 1 }).collect();
                    if let Some(v) = combination_value(&zs, &idx, &signs) {
                        let c = Candidate { value: v, idx: idx.clone(), signs };
                        if best.as_ref().is_none_or(|b| c.better_than(b)) {
                            best = Some(c);
                        }
                    }
                }
                if !advance(&mut idx, first, zs.len()) {
                    break;
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.better_than(&a) { b } else { a })
        .ok_or_else(|| Error::Domain("every combination vanishes".into()))?;
    Ok(SqrtCombination {
        min_value: best.value,
        tuple: best.idx.iter().map(|&i| (zs[i].a, zs[i].b)).collect(),
        signs: best.signs,
    })
}

#[derive(Clone, Copy, Debug)]
struct Norm {
    z: Dd,
    root: f64,
    a: u64,
    b: u64,
}

fn distinct_norms(eta: f64, mmax: f64) -> Vec<Norm> {
    let mut out: Vec<Norm> = Vec::new();
    let bmax = (mmax / eta).sqrt().floor() as u64 + 1;
    for b in 0..=bmax {
        let (hi, lo) = two_prod(eta, (b * b) as f64);
        let eb = Dd::new(hi, lo);
        let amax = mmax.sqrt().floor() as u64 + 1;
        for a in 0..=amax {
            if a == 0 && b == 0 {
                continue;
            }
            let z = Dd::from_f64((a * a) as f64) + eb;
            if z.to_f64() <= mmax {
                out.push(Norm { z, root: z.to_f64().sqrt(), a, b });
            }
        }
    }
    out.sort_by(|x, y| x.z.total_cmp(&y.z).then((x.a, x.b).cmp(&(y.a, y.b))));
    out.dedup_by(|later, first| later.z == first.z);
    out
}

/// Next nondecreasing index tuple with a fixed first entry.
fn advance(idx: &mut [usize], first: usize, n: usize) -> bool {
    let m = idx.len();
    let mut j = m - 1;
    while j >= 1 {
        if idx[j] + 1 < n {
            let v = idx[j] + 1;
            idx[j..].iter_mut().for_each(|x| *x = v);
            return true;
        }
        j -= 1;
    }
    idx.iter_mut().for_each(|x| *x = first);
    false
}

fn combination_value(zs: &[Norm], idx: &[usize], signs: &[i8]) -> Option<f64> {
    // term-by-term cancellation on equal indices
    let mut net: Vec<(usize, i32)> = Vec::with_capacity(idx.len());
    for (&i, &s) in idx.iter().zip(signs) {
        match net.iter_mut().find(|(k, _)| *k == i) {
            Some((_, c)) => *c += s as i32,
            None => net.push((i, s as i32)),
        }
    }
    if net.iter().all(|&(_, c)| c == 0) {
        return None;
    }
    let v: f64 = net.iter().map(|&(i, c)| c as f64 * zs[i].root).sum::<f64>().abs();
    let v = if v < RECHECK {
        net.iter()
            .fold(Dd::ZERO, |acc, &(i, c)| acc + zs[i].z.sqrt() * Dd::from_f64(c as f64))
            .abs()
            .to_f64()
    } else {
        v
    };
    (v >= ZERO_TOL).then_some(v)
}

struct Candidate {
    value: f64,
    idx: Vec<usize>,
    signs: Vec<i8>,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        self.value
            .total_cmp(&other.value)
            .then_with(|| self.idx.cmp(&other.idx))
            .then_with(|| other.signs.cmp(&self.signs))
            .is_lt()
    }
}

/// Minima of the square-root combination over a range of `Mmax`, with the
/// empirical exponent `K ≈ −slope`.
#[derive(Clone, Debug, Serialize)]
pub struct SqrtCombinationTrend {
    pub eta: f64,
    pub m: usize,
    pub mmax: Vec<f64>,
    pub minima: Vec<f64>,
    pub fit: LogLogFit,
    pub k_estimate: f64,
}

pub fn sqrt_combination_trend(eta: f64, m: usize, mmax: &[f64]) -> Result<SqrtCombinationTrend> {
    let minima = mmax
        .iter()
        .map(|&x| min_sqrt_combination(eta, m, x).map(|c| c.min_value))
        .collect::<Result<Vec<_>>>()?;
    let fit = log_log_fit(mmax, &minima)?;
    Ok(SqrtCombinationTrend { eta, m, mmax: mmax.to_vec(), minima, fit, k_estimate: -fit.slope })
}

pub fn min_dual_norm_gap(lat: &EllipseLattice, m: f64) -> Result<f64> {
    min_dual_norm_gap_with_budget(lat, m, DEFAULT_BUDGET)
}

/// Smallest `|k| − |k′|` between distinct nonzero dual norms with `|k|² ≤ M`.
/// Infinite when fewer than two distinct norms exist.
pub fn min_dual_norm_gap_with_budget(lat: &EllipseLattice, m: f64, budget: u64) -> Result<f64> {
    let spec = norm_spectrum_with_budget(lat, Side::Dual, m, budget)?;
    let roots: Vec<Dd> = spec
        .entries
        .iter()
        .filter(|e| e.squared_norm > 0.0)
        .map(|e| e.squared_norm_dd.sqrt())
        .collect();
    Ok(roots
        .windows(2)
        .map(|w| (w[1] - w[0]).to_f64())
        .fold(f64::INFINITY, f64::min))
}

/// Dual norm gaps over several `M`; `gap ≫ M^{−(K₀+1/2)}` gives `K₀ ≈ −slope − 1/2`.
#[derive(Clone, Debug, Serialize)]
pub struct GapScan {
    pub alpha: f64,
    pub ms: Vec<f64>,
    pub gaps: Vec<f64>,
    pub fit: LogLogFit,
    pub k0_estimate: f64,
}

pub fn gap_scan(lat: &EllipseLattice, ms: &[f64]) -> Result<GapScan> {
    let gaps = ms.iter().map(|&m| min_dual_norm_gap(lat, m)).collect::<Result<Vec<_>>>()?;
    let fit = log_log_fit(ms, &gaps)?;
    Ok(GapScan { alpha: lat.alpha, ms: ms.to_vec(), gaps, fit, k0_estimate: -fit.slope - 0.5 })
}

impl GapScan {
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["M", "gap"])?;
        for (m, g) in self.ms.iter().zip(&self.gaps) {
            w.write_record([m.to_string(), g.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
