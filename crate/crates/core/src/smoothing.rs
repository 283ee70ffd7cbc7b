//! The smoothing kernel `ψ̂` and dual-lattice sums for the smoothed count and
//! the smoothed annulus remainder.

use crate::error::{invalid, Result};
use crate::lattice::{multiplicity_r, EllipseLattice, Side};
use crate::numeric::dd::Dd;
use crate::numeric::trig::OscillatorySeries;
use serde::Serialize;
use std::f64::consts::PI;
use std::io;

pub const DEFAULT_GRID: usize = 4096;
pub const MIN_GRID: usize = 256;

/// `φ(x) = exp(−1/(1/4 − x²))` on `|x| < 1/2`.
pub fn bump(x: f64) -> f64 {
    let g = 0.25 - x * x;
    if g <= 0.0 {
        0.0
    } else {
        (-1.0 / g).exp()
    }
}

/// `ψ̂ = φ ⋆ φ`, tabulated on `[0, 1]` and normalized to `ψ̂(0) = 1`.
#[derive(Clone, Debug)]
pub struct SmoothingKernel {
    values: Vec<f64>,
    step: f64,
}

pub fn build_kernel(grid_points: usize) -> Result<SmoothingKernel> {
    if grid_points < MIN_GRID {
        return Err(invalid(format!("kernel grid needs at least {MIN_GRID} points, got {grid_points}")));
    }
    let g = grid_points;
    let step = 1.0 / (g - 1) as f64;
    // φ sampled at the same spacing on [-1/2, 1/2]; its endpoint values vanish,
    // so the trapezoid rule reduces to a plain sum and converges spectrally.
    let phi: Vec<f64> = (0..g).map(|j| bump(-0.5 + j as f64 * step)).collect();
    let mut values: Vec<f64> = (0..g)
        .map(|i| phi[..g - i].iter().zip(&phi[i..]).map(|(a, b)| a * b).sum())
        .collect();
    let norm = values[0];
    for v in &mut values {
        *v /= norm;
    }
    values[g - 1] = 0.0;
    Ok(SmoothingKernel { values, step })
}

impl Default for SmoothingKernel {
    fn default() -> Self {
        build_kernel(DEFAULT_GRID).expect("default grid is valid")
    }
}

#[derive(Serialize)]
struct KernelRow {
    x: f64,
    psi_hat: f64,
}

impl SmoothingKernel {
    pub fn support_radius(&self) -> f64 {
        1.0
    }

    pub fn grid_step(&self) -> f64 {
        self.step
    }

    pub fn grid(&self) -> &[f64] {
        &self.values
    }

    fn node(&self, i: isize) -> f64 {
        let i = i.unsigned_abs();
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// `ψ̂(x)` by Catmull–Rom interpolation; even in `x`, zero for `|x| ≥ 1`.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        if x >= 1.0 {
            return 0.0;
        }
        let u = x / self.step;
        let i = u.floor();
        let f = u - i;
        let i = i as isize;
        let (p0, p1, p2, p3) = (self.node(i - 1), self.node(i), self.node(i + 1), self.node(i + 2));
        let v = 0.5
            * (2.0 * p1
                + f * ((p2 - p0)
                    + f * ((2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) + f * (3.0 * (p1 - p2) + p3 - p0))));
        v.clamp(0.0, 1.0)
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (i, &v) in self.values.iter().enumerate() {
            w.serialize(KernelRow { x: i as f64 * self.step, psi_hat: v })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A first-quadrant dual vector class: `|k|` and the number `r` of sign images.
#[derive(Clone, Copy, Debug)]
pub struct DualShell {
    pub norm: Dd,
    pub n: i64,
    pub m: i64,
    pub r: u32,
}

/// Nonzero first-quadrant dual vectors with `|k|² < cutoff_sq`, sorted by `|k|`.
pub fn dual_shells(lat: &EllipseLattice, cutoff_sq: f64) -> Vec<DualShell> {
    if !(cutoff_sq > 0.0) {
        return Vec::new();
    }
    shells_within(lat, Dd::from_f64(cutoff_sq), true)
}

pub(crate) fn shells_within(lat: &EllipseLattice, r2: Dd, strict: bool) -> Vec<DualShell> {
    let mut out = Vec::new();
    let mut rows = Vec::new();
    lat.for_each_row(Side::Dual, r2, strict, |m, w| rows.push((m, w)));
    for (m, w) in rows {
        for n in 0..=w {
            if n == 0 && m == 0 {
                continue;
            }
            out.push(DualShell {
                norm: lat.squared_norm_dd(n, m, Side::Dual).sqrt(),
                n,
                m,
                r: multiplicity_r(n, m),
            });
        }
    }
    out.sort_by(|a, b| a.norm.total_cmp(&b.norm).then((a.n, a.m).cmp(&(b.n, b.m))));
    out
}

/// `S̃(t) = (2/(dπ)) Σ_{k≠0} sin(π|k|/L)/|k|^{3/2} · sin(2π(t + 1/(2L))|k| + π/4) · ψ̂(|k|/√M)`.
#[derive(Clone, Debug)]
pub struct SmoothRemainder {
    series: OscillatorySeries,
    prefactor: f64,
}

impl SmoothRemainder {
    pub fn new(lat: &EllipseLattice, kernel: &SmoothingKernel, l: f64, m: f64) -> Self {
        Self::with_cutoff(lat, kernel, l, m, m)
    }

    /// Enumerates dual vectors up to `|k|² < cutoff_sq`; terms beyond the
    /// kernel support vanish identically.
    pub fn with_cutoff(lat: &EllipseLattice, kernel: &SmoothingKernel, l: f64, m: f64, cutoff_sq: f64) -> Self {
        let sqrt_m = m.sqrt();
        let terms = dual_shells(lat, cutoff_sq).into_iter().map(|s| {
            let k = s.norm.to_f64();
            let w = s.r as f64 * (PI * k / l).sin() / (k * k.sqrt()) * kernel.eval(k / sqrt_m);
            (s.norm, k / (2.0 * l) + 0.125, w)
        });
        SmoothRemainder {
            series: OscillatorySeries::new(terms),
            prefactor: 2.0 / (lat.det_d * PI),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.prefactor * self.series.eval(t)
    }

    pub fn num_terms(&self) -> usize {
        self.series.len()
    }
}

/// `Ñ(t) = πt²/d − (√t/(dπ)) Σ_{k≠0} cos(2πt|k| + π/4)/|k|^{3/2} · ψ̂(|k|/√M)`.
#[derive(Clone, Debug)]
pub struct SmoothCount {
    series: OscillatorySeries,
    det_d: f64,
}

impl SmoothCount {
    pub fn new(lat: &EllipseLattice, kernel: &SmoothingKernel, m: f64) -> Self {
        Self::with_cutoff(lat, kernel, m, m)
    }

    pub fn with_cutoff(lat: &EllipseLattice, kernel: &SmoothingKernel, m: f64, cutoff_sq: f64) -> Self {
        let sqrt_m = m.sqrt();
        let terms = dual_shells(lat, cutoff_sq).into_iter().map(|s| {
            let k = s.norm.to_f64();
            let w = s.r as f64 / (k * k.sqrt()) * kernel.eval(k / sqrt_m);
            // cos(x) = sin(x + π/2)
            (s.norm, 0.375, w)
        });
        SmoothCount { series: OscillatorySeries::new(terms), det_d: lat.det_d }
    }

    pub fn eval(&self, t: f64) -> f64 {
        PI * t * t / self.det_d - t.sqrt() / (self.det_d * PI) * self.series.eval(t)
    }

    pub fn num_terms(&self) -> usize {
        self.series.len()
    }
}

pub fn smooth_count(lat: &EllipseLattice, kernel: &SmoothingKernel, m: f64, t: f64) -> f64 {
    SmoothCount::new(lat, kernel, m).eval(t)
}

pub fn smooth_remainder(lat: &EllipseLattice, kernel: &SmoothingKernel, m: f64, l: f64, t: f64) -> f64 {
    SmoothRemainder::new(lat, kernel, l, m).eval(t)
}
