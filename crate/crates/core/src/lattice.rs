//! Rectangular lattices `⟨1, iα⟩`, their duals `⟨1, i/α⟩`, and norm spectra.
//!
//! Squared norms are `n² + m²·c` with `c = γ = α²` on the primal side and
//! `c = κ = 1/α²` on the dual side. The coefficient is carried in
//! double-double so ball-membership tests near the boundary can be decided
//! beyond `f64` precision.

use crate::error::{invalid, Error, Result};
use crate::numeric::dd::Dd;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::io;

/// Default cap on the number of vectors an enumeration may materialize.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Primal,
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipseLattice {
    pub alpha: f64,
    pub gamma: f64,
    pub beta: f64,
    pub kappa: f64,
    pub det_d: f64,
    gamma_dd: Dd,
    kappa_dd: Dd,
}

impl EllipseLattice {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid(format!("alpha must be positive and finite, got {alpha}")));
        }
        let gamma_dd = Dd::mul_f64(alpha, alpha);
        let kappa_dd = gamma_dd.recip();
        Ok(EllipseLattice {
            alpha,
            gamma: gamma_dd.to_f64(),
            beta: 1.0 / alpha,
            kappa: kappa_dd.to_f64(),
            det_d: alpha,
            gamma_dd,
            kappa_dd,
        })
    }

    /// The coefficient of `m²` in the squared norm.
    pub fn coefficient(&self, side: Side) -> Dd {
        match side {
            Side::Primal => self.gamma_dd,
            Side::Dual => self.kappa_dd,
        }
    }

    pub fn squared_norm_dd(&self, n: i64, m: i64, side: Side) -> Dd {
        Dd::square_int(n) + Dd::square_int(m) * self.coefficient(side)
    }

    pub fn squared_norm(&self, n: i64, m: i64, side: Side) -> f64 {
        self.squared_norm_dd(n, m, side).to_f64()
    }

    pub fn vector(&self, n: i64, m: i64, side: Side) -> LatticeVector {
        LatticeVector { n, m, side, squared_norm: self.squared_norm(n, m, side) }
    }

    /// Whether `(n, m)` lies in the ball of squared radius `r2`; the float
    /// test is re-decided in double-double when it is within `1e-9·r2`.
    pub(crate) fn inside(&self, n: i64, m: i64, side: Side, r2: Dd, strict: bool) -> bool {
        let c = self.coefficient(side).hi;
        let (nf, mf) = (n as f64, m as f64);
        let v = nf * nf + mf * mf * c;
        let lim = r2.hi;
        if (v - lim).abs() > 1e-9 * lim.max(1.0) {
            return if strict { v < lim } else { v <= lim };
        }
        let d = (self.squared_norm_dd(n, m, side) - r2).to_f64();
        if strict {
            d < 0.0
        } else {
            d <= 0.0
        }
    }

    /// Largest `w ≥ 0` with `(w, m)` in the ball, or `None` if the row is empty.
    pub(crate) fn row_half_width(&self, m: i64, side: Side, r2: Dd, strict: bool) -> Option<i64> {
        let c = self.coefficient(side).hi;
        let mf = m as f64;
        let rem = r2.hi - mf * mf * c;
        if rem < -1e-9 * r2.hi.max(1.0) {
            return None;
        }
        let mut w = rem.max(0.0).sqrt().floor() as i64;
        while self.inside(w + 1, m, side, r2, strict) {
            w += 1;
        }
        while w >= 0 && !self.inside(w, m, side, r2, strict) {
            w -= 1;
        }
        (w >= 0).then_some(w)
    }

    /// Calls `f(m, w)` for every nonempty row `m ≥ 0`, where `w` is the row's
    /// half width. Rows shrink with `m`, so the scan stops at the first empty one.
    pub(crate) fn for_each_row(&self, side: Side, r2: Dd, strict: bool, mut f: impl FnMut(i64, i64)) {
        let mut m = 0;
        while let Some(w) = self.row_half_width(m, side, r2, strict) {
            f(m, w);
            m += 1;
        }
    }

    /// Number of vectors with squared norm `≤ r2` (or `< r2` when `strict`).
    pub fn count_in_ball(&self, side: Side, r2: Dd, strict: bool) -> u64 {
        let mut total = 0u64;
        self.for_each_row(side, r2, strict, |m, w| {
            let row = 2 * w as u64 + 1;
            total += if m == 0 { row } else { 2 * row };
        });
        total
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticeVector {
    pub n: i64,
    pub m: i64,
    pub side: Side,
    pub squared_norm: f64,
}

impl LatticeVector {
    pub fn multiplicity(&self) -> u32 {
        multiplicity_r(self.n, self.m)
    }
}

/// Number of sign images of `(n, m)`: 1 at the origin, 2 on an axis, else 4.
pub fn multiplicity_r(n: i64, m: i64) -> u32 {
    match (n == 0, m == 0) {
        (true, true) => 1,
        (true, false) | (false, true) => 2,
        _ => 4,
    }
}

pub fn squared_norm(v: (i64, i64), lat: &EllipseLattice, side: Side) -> f64 {
    lat.squared_norm(v.0, v.1, side)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Enumeration {
    All,
    /// First-quadrant primitive vectors: `n, m ≥ 0`, `gcd(n, m) = 1`.
    QuadrantPrimitive,
}

pub fn enumerate_vectors(
    lat: &EllipseLattice,
    side: Side,
    radius: f64,
    mode: Enumeration,
) -> Result<Vec<LatticeVector>> {
    enumerate_vectors_with_budget(lat, side, radius, mode, DEFAULT_BUDGET)
}

pub fn enumerate_vectors_with_budget(
    lat: &EllipseLattice,
    side: Side,
    radius: f64,
    mode: Enumeration,
    budget: u64,
) -> Result<Vec<LatticeVector>> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(invalid(format!("radius must be finite and nonnegative, got {radius}")));
    }
    let r2 = Dd::mul_f64(radius, radius);
    let mut rows = Vec::new();
    lat.for_each_row(side, r2, false, |m, w| rows.push((m, w)));
    let required: u64 = match mode {
        Enumeration::All => lat.count_in_ball(side, r2, false),
        Enumeration::QuadrantPrimitive => rows.iter().map(|&(_, w)| w as u64 + 1).sum(),
    };
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    let mut out = Vec::with_capacity(required as usize);
    match mode {
        Enumeration::All => {
            let top = rows.len() as i64 - 1;
            for m in -top..=top {
                let w = rows[m.unsigned_abs() as usize].1;
                for n in -w..=w {
                    out.push(lat.vector(n, m, side));
                }
            }
        }
        Enumeration::QuadrantPrimitive => {
            for &(m, w) in &rows {
                for n in 0..=w {
                    if n.gcd(&m) == 1 {
                        out.push(lat.vector(n, m, side));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub squared_norm: f64,
    #[serde(skip)]
    pub squared_norm_dd: Dd,
    pub n: i64,
    pub m: i64,
    pub multiplicity: u64,
}

/// Distinct squared norms up to a cutoff.
///
/// Norms are merged only when their double-double values coincide exactly,
/// which for the stored coefficient means the norms are genuinely equal.
#[derive(Clone, Debug)]
pub struct SpectrumTable {
    pub side: Side,
    pub cutoff: f64,
    pub entries: Vec<SpectrumEntry>,
    pub min_gap: f64,
}

pub fn norm_spectrum(lat: &EllipseLattice, side: Side, x: f64) -> Result<SpectrumTable> {
    norm_spectrum_with_budget(lat, side, x, DEFAULT_BUDGET)
}

pub fn norm_spectrum_with_budget(
    lat: &EllipseLattice,
    side: Side,
    x: f64,
    budget: u64,
) -> Result<SpectrumTable> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(format!("spectrum cutoff must be positive, got {x}")));
    }
    let r2 = Dd::from_f64(x);
    let mut rows = Vec::new();
    lat.for_each_row(side, r2, false, |m, w| rows.push((m, w)));
    let required: u64 = rows.iter().map(|&(_, w)| w as u64 + 1).sum();
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    let mut keys: Vec<(Dd, i64, i64)> = Vec::with_capacity(required as usize);
    for &(m, w) in &rows {
        for n in 0..=w {
            keys.push((lat.squared_norm_dd(n, m, side), n, m));
        }
    }
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for (v, n, m) in keys {
        let r = multiplicity_r(n, m) as u64;
        match entries.last_mut() {
            Some(last) if last.squared_norm_dd == v => last.multiplicity += r,
            _ => entries.push(SpectrumEntry {
                squared_norm: v.to_f64(),
                squared_norm_dd: v,
                n,
                m,
                multiplicity: r,
            }),
        }
    }
    let min_gap = entries
        .windows(2)
        .map(|w| (w[1].squared_norm_dd - w[0].squared_norm_dd).to_f64())
        .fold(f64::INFINITY, f64::min);
    Ok(SpectrumTable { side, cutoff: x, entries, min_gap })
}

#[derive(Serialize)]
struct SpectrumRow {
    squared_norm: f64,
    n: i64,
    m: i64,
    multiplicity: u64,
}

impl SpectrumTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of lattice vectors represented.
    pub fn total_count(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Gap data around the norm nearest to `x`; on a tie the smaller norm is chosen.
    /// Returns the smaller of the two gaps adjoining that norm.
    pub fn delta_at(&self, x: f64) -> f64 {
        let e = &self.entries;
        if e.is_empty() {
            return f64::INFINITY;
        }
        let idx = e.partition_point(|v| v.squared_norm < x);
        let chosen = if idx == 0 {
            0
        } else if idx == e.len() || x - e[idx - 1].squared_norm <= e[idx].squared_norm - x {
            idx - 1
        } else {
            idx
        };
        let gap = |i: usize, j: usize| (e[j].squared_norm_dd - e[i].squared_norm_dd).to_f64();
        let below = if chosen > 0 { gap(chosen - 1, chosen) } else { f64::INFINITY };
        let above = if chosen + 1 < e.len() { gap(chosen, chosen + 1) } else { f64::INFINITY };
        below.min(above)
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.entries {
            w.serialize(SpectrumRow {
                squared_norm: e.squared_norm,
                n: e.n,
                m: e.m,
                multiplicity: e.multiplicity,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `#{(k, l) : R ≤ |k|² ≤ 2R, |k|² ≤ |l|² ≤ |k|² + δ}` over vectors of one side.
pub fn pair_near_count(lat: &EllipseLattice, side: Side, r: f64, delta: f64) -> Result<u64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("R must be positive, got {r}")));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(invalid(format!("delta must be nonnegative, got {delta}")));
    }
    let cutoff = (2.0 * r + delta) * (1.0 + 1e-12) + 1e-12;
    let spec = norm_spectrum(lat, side, cutoff)?;
    let xs: Vec<f64> = spec.entries.iter().map(|e| e.squared_norm).collect();
    let mut prefix = vec![0u64; xs.len() + 1];
    for (i, e) in spec.entries.iter().enumerate() {
        prefix[i + 1] = prefix[i] + e.multiplicity;
    }
    let mut total = 0u64;
    let mut lo = 0;
    let mut hi = 0;
    for (i, &k2) in xs.iter().enumerate() {
        if k2 < r || k2 > 2.0 * r {
            continue;
        }
        while xs[lo] < k2 {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < xs.len() && xs[hi] <= k2 + delta {
            hi += 1;
        }
        total += spec.entries[i].multiplicity * (prefix[hi] - prefix[lo]);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn brute_force_ball(lat: &EllipseLattice, side: Side, r2: f64) -> Vec<LatticeVector> {
        let c = match side {
            Side::Primal => lat.alpha * lat.alpha,
            Side::Dual => 1.0 / (lat.alpha * lat.alpha),
        };
        let nb = r2.sqrt().ceil() as i64 + 1;
        let mb = (r2 / c).sqrt().ceil() as i64 + 1;
        let mut out = Vec::new();
        for m in -mb..=mb {
            for n in -nb..=nb {
                if (n * n) as f64 + (m * m) as f64 * c <= r2 {
                    out.push(lat.vector(n, m, side));
                }
            }
        }
        out
    }

    fn brute_pair_count(lat: &EllipseLattice, side: Side, r: f64, delta: f64) -> u64 {
        let vs = brute_force_ball(lat, side, 2.0 * r + delta + 1.0);
        let mut count = 0;
        for k in &vs {
            let k2 = k.squared_norm;
            if k2 < r || k2 > 2.0 * r {
                continue;
            }
            for l in &vs {
                let l2 = l.squared_norm;
                if k2 <= l2 && l2 <= k2 + delta {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn squared_norm_examples() {
        let any = EllipseLattice::new(1.7).unwrap();
        assert_eq!(squared_norm((0, 0), &any, Side::Primal), 0.0);
        assert_eq!(squared_norm((3, 0), &any, Side::Dual), 9.0);
        let sqrt2 = EllipseLattice::new(2f64.sqrt()).unwrap();
        assert!((squared_norm((1, 2), &sqrt2, Side::Primal) - 9.0).abs() < 1e-14);
    }

    #[test]
    fn derived_constants() {
        for &a in &[0.3, 1.0, std::f64::consts::E, 2f64.powf(0.25)] {
            let lat = EllipseLattice::new(a).unwrap();
            assert!((lat.gamma - a * a).abs() <= f64::EPSILON * a * a);
            assert!((lat.kappa * lat.gamma - 1.0).abs() <= 2.0 * f64::EPSILON);
            assert_eq!(lat.det_d, a);
        }
        assert!(EllipseLattice::new(0.0).is_err());
        assert!(EllipseLattice::new(-1.0).is_err());
        assert!(EllipseLattice::new(f64::NAN).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let one = EllipseLattice::new(1.0).unwrap();
        let v = enumerate_vectors(&one, Side::Dual, 1.0, Enumeration::All).unwrap();
        let got: BTreeSet<_> = v.iter().map(|v| (v.n, v.m)).collect();
        let want: BTreeSet<_> = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)].into_iter().collect();
        assert_eq!(got, want);

        let two = EllipseLattice::new(2.0).unwrap();
        let v = enumerate_vectors(&two, Side::Primal, 2.0, Enumeration::All).unwrap();
        let got: BTreeSet<_> = v.iter().map(|v| (v.n, v.m)).collect();
        let want: BTreeSet<_> =
            [(0, 0), (1, 0), (-1, 0), (2, 0), (-2, 0), (0, 1), (0, -1)].into_iter().collect();
        assert_eq!(got, want);

        for &a in &[0.6, 1.0, 1.9] {
            let lat = EllipseLattice::new(a).unwrap();
            for side in [Side::Primal, Side::Dual] {
                let v = enumerate_vectors(&lat, side, 0.5, Enumeration::All).unwrap();
                assert_eq!(v.len(), 1);
                assert_eq!((v[0].n, v[0].m), (0, 0));
            }
        }
    }

    #[test]
    fn primitive_enumeration() {
        let lat = EllipseLattice::new(1.3).unwrap();
        let v = enumerate_vectors(&lat, Side::Dual, 6.0, Enumeration::QuadrantPrimitive).unwrap();
        assert!(v.iter().all(|v| v.n >= 0 && v.m >= 0 && v.n.gcd(&v.m) == 1));
        assert!(v.iter().any(|v| (v.n, v.m) == (1, 0)));
        assert!(v.iter().any(|v| (v.n, v.m) == (0, 1)));
        assert!(!v.iter().any(|v| (v.n, v.m) == (2, 0)));
        let all = enumerate_vectors(&lat, Side::Dual, 6.0, Enumeration::All).unwrap();
        let expected = all.iter().filter(|v| v.n >= 0 && v.m >= 0 && v.n.gcd(&v.m) == 1).count();
        assert_eq!(v.len(), expected);
    }

    #[test]
    fn budget_is_enforced() {
        let lat = EllipseLattice::new(1.0).unwrap();
        let err = enumerate_vectors_with_budget(&lat, Side::Primal, 100.0, Enumeration::All, 1000);
        assert!(matches!(err, Err(Error::Budget { .. })));
        assert!(enumerate_vectors(&lat, Side::Primal, -1.0, Enumeration::All).is_err());
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity_r(0, 0), 1);
        assert_eq!(multiplicity_r(3, 0), 2);
        assert_eq!(multiplicity_r(0, -5), 2);
        assert_eq!(multiplicity_r(1, 2), 4);
    }

    #[test]
    fn square_lattice_spectrum_merges_equal_norms() {
        let one = EllipseLattice::new(1.0).unwrap();
        let s = norm_spectrum(&one, Side::Primal, 2.0).unwrap();
        let norms: Vec<f64> = s.entries.iter().map(|e| e.squared_norm).collect();
        let mult: Vec<u64> = s.entries.iter().map(|e| e.multiplicity).collect();
        assert_eq!(norms, vec![0.0, 1.0, 2.0]);
        assert_eq!(mult, vec![1, 4, 4]);
        assert_eq!(s.min_gap, 1.0);
        // 25 = 5² + 0² = 3² + 4²
        let s = norm_spectrum(&one, Side::Primal, 25.0).unwrap();
        assert_eq!(s.entries.last().unwrap().multiplicity, 12);
    }

    #[test]
    fn irrational_spectrum_has_no_extra_multiplicity() {
        for a in [2f64.powf(0.25), std::f64::consts::E] {
            let lat = EllipseLattice::new(a).unwrap();
            let s = norm_spectrum(&lat, Side::Primal, 1e4).unwrap();
            for e in &s.entries {
                assert_eq!(e.multiplicity, multiplicity_r(e.n, e.m) as u64);
            }
            assert!(s.entries.windows(2).all(|w| w[0].squared_norm < w[1].squared_norm));
        }
    }

    #[test]
    fn delta_at_prefers_lower_norm_on_ties() {
        let one = EllipseLattice::new(1.0).unwrap();
        let s = norm_spectrum(&one, Side::Primal, 10.0).unwrap();
        // norms 0 1 2 4 5 8 9 10
        assert_eq!(s.delta_at(3.0), 1.0); // tie between 2 and 4: pick 2, gaps 1 and 2
        assert_eq!(s.delta_at(3.1), 1.0); // nearest is 4: gaps 2 and 1
        assert_eq!(s.delta_at(6.5), 1.0); // tie between 5 and 8: pick 5, gaps 1 and 3
        assert_eq!(s.delta_at(6.6), 1.0); // 8: gaps 3 and 1
        assert_eq!(s.delta_at(0.0), 1.0);
    }

    #[test]
    fn csv_export() {
        let one = EllipseLattice::new(1.0).unwrap();
        let s = norm_spectrum(&one, Side::Primal, 2.0).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("squared_norm,n,m,multiplicity"));
        assert_eq!(lines.next(), Some("0.0,0,0,1"));
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn pair_count_degenerates_to_diagonal_at_zero_width() {
        let lat = EllipseLattice::new(std::f64::consts::E).unwrap();
        let s = norm_spectrum(&lat, Side::Dual, 200.0).unwrap();
        let diag: u64 = s
            .entries
            .iter()
            .filter(|e| (50.0..=100.0).contains(&e.squared_norm))
            .map(|e| e.multiplicity * e.multiplicity)
            .sum();
        assert_eq!(pair_near_count(&lat, Side::Dual, 50.0, 0.0).unwrap(), diag);
    }

    #[test]
    fn pair_count_matches_double_loop() {
        let lat = EllipseLattice::new(2f64.sqrt()).unwrap();
        for side in [Side::Primal, Side::Dual] {
            assert_eq!(
                pair_near_count(&lat, side, 100.0, 1.0).unwrap(),
                brute_pair_count(&lat, side, 100.0, 1.0)
            );
        }
    }

    #[test]
    fn pair_count_scales_like_r_delta() {
        let lat = EllipseLattice::new(2f64.sqrt()).unwrap();
        let delta = 2.0;
        let ratios: Vec<f64> = [100.0, 200.0, 400.0, 800.0, 1600.0]
            .iter()
            .map(|&r| pair_near_count(&lat, Side::Dual, r, delta).unwrap() as f64 / (r * delta))
            .collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo < 1.5, "{ratios:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn enumeration_matches_box_scan(a in 0.3f64..3.0, r in 0.0f64..15.0, dual: bool) {
            let lat = EllipseLattice::new(a).unwrap();
            let side = if dual { Side::Dual } else { Side::Primal };
            let got: BTreeSet<_> = enumerate_vectors(&lat, side, r, Enumeration::All)
                .unwrap().iter().map(|v| (v.n, v.m)).collect();
            let want: BTreeSet<_> = brute_force_ball(&lat, side, r * r)
                .iter().map(|v| (v.n, v.m)).collect();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn enumeration_is_nested(a in 0.3f64..3.0, r in 0.1f64..20.0, frac in 0.0f64..1.0) {
            let lat = EllipseLattice::new(a).unwrap();
            let small = r * frac;
            let outer = enumerate_vectors(&lat, Side::Primal, r, Enumeration::All).unwrap();
            let filtered: BTreeSet<_> = outer.iter()
                .filter(|v| lat.inside(v.n, v.m, Side::Primal, Dd::mul_f64(small, small), false))
                .map(|v| (v.n, v.m)).collect();
            let inner: BTreeSet<_> = enumerate_vectors(&lat, Side::Primal, small, Enumeration::All)
                .unwrap().iter().map(|v| (v.n, v.m)).collect();
            prop_assert_eq!(filtered, inner);
        }

        #[test]
        fn spectrum_mass_equals_vector_count(a in 0.3f64..3.0, x in 0.5f64..400.0) {
            let lat = EllipseLattice::new(a).unwrap();
            let s = norm_spectrum(&lat, Side::Dual, x).unwrap();
            let n = enumerate_vectors(&lat, Side::Dual, x.sqrt(), Enumeration::All).unwrap().len();
            prop_assert_eq!(s.total_count(), n as u64);
            prop_assert!(s.entries.windows(2).all(|w| w[0].squared_norm < w[1].squared_norm));
        }

        #[test]
        fn stored_norm_is_reproducible(a in 0.3f64..3.0, n in -500i64..500, m in -500i64..500) {
            let lat = EllipseLattice::new(a).unwrap();
            let v = lat.vector(n, m, Side::Primal);
            prop_assert_eq!(v.squared_norm, squared_norm((n, m), &lat, Side::Primal));
            prop_assert_eq!(v.squared_norm == 0.0, n == 0 && m == 0);
            prop_assert!(v.squared_norm >= 0.0);
        }

        #[test]
        fn pair_count_matches_double_loop_small_r(a in 0.5f64..2.0, r in 1.0f64..200.0, delta in 0.0f64..4.0) {
            let lat = EllipseLattice::new(a).unwrap();
            prop_assert_eq!(
                pair_near_count(&lat, Side::Dual, r, delta).unwrap(),
                brute_pair_count(&lat, Side::Dual, r, delta)
            );
        }
    }
}
