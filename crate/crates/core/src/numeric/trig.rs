//! Phase-accurate evaluation of `sin(2π·(t·k + shift))` for large `t·k`.
//!
//! A naive `sin(2π * t * k)` at `t ~ 10^6`, `k ~ 10^2` keeps only about
//! eight correct digits of phase. Here the product `t·k` is formed exactly
//! as a double-double, its integer part is discarded, and the remaining
//! fraction of a turn is fed to a short polynomial on `[-π/4, π/4]`.

use super::dd::{two_prod, Dd};
use super::sum::{KahanSum, LaneSum};

use std::f64::consts::TAU;

const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0; // 1.5 * 2^52
const SAFE_PRODUCT: f64 = 1_125_899_906_842_624.0; // 2^50
const BLOCK: usize = 256;

/// Round to nearest integer; valid for `|x| < 2^51`.
#[inline(always)]
fn round_small(x: f64) -> f64 {
    (x + ROUND_MAGIC) - ROUND_MAGIC
}

/// Taylor coefficients of `sin θ / θ` in powers of `θ²`, highest first.
const SIN_COEF: [f64; 11] = [
    1.0 / 51_090_942_171_709_440_000.0,
    -1.0 / 121_645_100_408_832_000.0,
    1.0 / 355_687_428_096_000.0,
    -1.0 / 1_307_674_368_000.0,
    1.0 / 6_227_020_800.0,
    -1.0 / 39_916_800.0,
    1.0 / 362_880.0,
    -1.0 / 5_040.0,
    1.0 / 120.0,
    -1.0 / 6.0,
    1.0,
];

/// `sin(2π x)` for `|x| < 2^49`, accurate to a few ulps.
///
/// Branch-free so the series loops below vectorize: the argument is folded
/// onto `[-1/4, 1/4]` turns using `sin(π - θ) = sin θ`. `mul_add` is a
/// correctly rounded fused operation on every target, so results do not
/// depend on hardware FMA support.
#[inline(always)]
pub fn sin_turns(x: f64) -> f64 {
    let r = x - round_small(x);
    let r = if r.abs() > 0.25 { 0.5f64.copysign(r) - r } else { r };
    let theta = r * TAU;
    let z = theta * theta;
    let mut p = SIN_COEF[0];
    for &c in &SIN_COEF[1..] {
        p = p.mul_add(z, c);
    }
    theta * p
}

/// Fractional part of `t·k` in turns, in `[-1/2, 1/2]`.
#[inline]
pub fn reduced_product(t: f64, k: Dd) -> f64 {
    let (p, e) = two_prod(t, k.hi);
    let f = p - p.round();
    let x = f + (e + t * k.lo);
    x - x.round()
}

/// `sin(2π·(t·k + shift))` with the product reduced exactly.
pub fn sin_phase(t: f64, k: Dd, shift: f64) -> f64 {
    sin_turns(reduced_product(t, k) + shift)
}

/// Precomputed weighted frequencies for `Σ_j w_j · sin(2π·(t·k_j + s_j))`.
///
/// Terms are kept in the order supplied; callers sort them by frequency so
/// the compensated sum is reproducible.
#[derive(Clone, Debug, Default)]
pub struct OscillatorySeries {
    k_hi: Vec<f64>,
    k_lo: Vec<f64>,
    shift: Vec<f64>,
    weight: Vec<f64>,
    max_k: f64,
}

impl OscillatorySeries {
    /// Builds the series from `(frequency, shift in turns, weight)` triples.
    /// Zero-weight terms are dropped.
    pub fn new<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Dd, f64, f64)>,
    {
        let mut s = OscillatorySeries::default();
        for (k, shift, w) in terms {
            if w == 0.0 {
                continue;
            }
            s.k_hi.push(k.hi);
            s.k_lo.push(k.lo);
            s.shift.push(shift - shift.round());
            s.weight.push(w);
            s.max_k = s.max_k.max(k.hi.abs());
        }
        s
    }

    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    fn term_generic(&self, j: usize, t: f64) -> f64 {
        let k = Dd::new(self.k_hi[j], self.k_lo[j]);
        self.weight[j] * sin_phase(t, k, self.shift[j])
    }

    /// Evaluates the series at `t`, accumulating in term order.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.len();
        if t.abs() * self.max_k >= SAFE_PRODUCT {
            let mut acc = KahanSum::new();
            for j in 0..n {
                acc.add(self.term_generic(j, t));
            }
            return acc.value();
        }
        let mut acc = LaneSum::default();
        let mut buf = [0.0; BLOCK];
        let mut start = 0;
        while start < n {
            let end = (start + BLOCK).min(n);
            let len = end - start;
            let kh = &self.k_hi[start..end];
            let kl = &self.k_lo[start..end];
            let shift = &self.shift[start..end];
            let w = &self.weight[start..end];
            let out = &mut buf[..len];
            for i in 0..len {
                let p = t * kh[i];
                let e = t.mul_add(kh[i], -p);
                let f = p - round_small(p);
                out[i] = w[i] * sin_turns(f + (e + t * kl[i]) + shift[i]);
            }
            let mut chunks = buf[..len].chunks_exact(4);
            for c in &mut chunks {
                acc.add_chunk4([c[0], c[1], c[2], c[3]]);
            }
            acc.add_tail(chunks.remainder());
            start = end;
        }
        acc.value()
    }

    /// Evaluates the series accumulating from the last term to the first.
    pub fn eval_reversed(&self, t: f64) -> f64 {
        let mut acc = KahanSum::new();
        for j in (0..self.len()).rev() {
            acc.add(self.term_generic(j, t));
        }
        acc.value()
    }
}
