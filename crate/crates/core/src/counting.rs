//! Sharp lattice point counts in ellipses and the normalized annulus remainder.

use crate::error::{invalid, Error, Result};
use crate::lattice::{EllipseLattice, Side};
use crate::numeric::dd::Dd;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Scale `T`, inverse width `L`, width `ρ = 1/L` and smoothness `M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct AnnulusParams {
    pub T: f64,
    pub L: f64,
    pub rho: f64,
    pub M: f64,
}

impl AnnulusParams {
    /// `M` defaults to `L³`.
    #[allow(non_snake_case)]
    pub fn new(T: f64, L: f64, M: Option<f64>) -> Result<Self> {
        let M = M.unwrap_or(L * L * L);
        for (name, v) in [("T", T), ("L", L), ("M", M)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if L > M.sqrt() {
            log::warn!("L = {L} exceeds sqrt(M) = {}; the smoothed model is not in its regime", M.sqrt());
        }
        Ok(AnnulusParams { T, L, rho: 1.0 / L, M })
    }
}

/// Number of lattice vectors with `|v| ≤ t`.
pub fn count_sharp(lat: &EllipseLattice, t: f64) -> u64 {
    if !(t >= 0.0) {
        return 0;
    }
    lat.count_in_ball(Side::Primal, Dd::mul_f64(t, t), false)
}

/// Number of lattice vectors with `|v| < t`.
pub fn count_open(lat: &EllipseLattice, t: f64) -> u64 {
    if !(t > 0.0) {
        return 0;
    }
    lat.count_in_ball(Side::Primal, Dd::mul_f64(t, t), true)
}

/// Number of vectors with `t < |v| ≤ t + ρ`, in one pass over the rows.
pub fn annulus_count(lat: &EllipseLattice, t: f64, rho: f64) -> u64 {
    let outer = t + rho;
    let r2_out = Dd::mul_f64(outer, outer);
    let r2_in = Dd::mul_f64(t, t);
    let mut total = 0u64;
    let mut m = 0;
    while let Some(w_out) = lat.row_half_width(m, Side::Primal, r2_out, false) {
        let inner = match lat.row_half_width(m, Side::Primal, r2_in, false) {
            Some(w) => 2 * w as u64 + 1,
            None => 0,
        };
        let row = 2 * w_out as u64 + 1 - inner;
        total += if m == 0 { row } else { 2 * row };
        m += 1;
    }
    total
}

/// Expected annulus count `(π/d)(2tρ + ρ²)`.
pub fn annulus_area(lat: &EllipseLattice, t: f64, rho: f64) -> f64 {
    PI / lat.det_d * (2.0 * t * rho + rho * rho)
}

/// `S(t, ρ) = [N(t+ρ) − N(t) − (π/d)(2tρ + ρ²)] / √t`.
pub fn remainder_sharp(lat: &EllipseLattice, t: f64, rho: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("remainder needs t > 0, got {t}")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be positive, got {rho}")));
    }
    let count = annulus_count(lat, t, rho) as f64;
    Ok((count - annulus_area(lat, t, rho)) / t.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_count(alpha: f64, t: f64) -> u64 {
        let g = alpha * alpha;
        let nb = t.ceil() as i64 + 1;
        let mb = (t / alpha).ceil() as i64 + 1;
        let mut c = 0;
        for m in -mb..=mb {
            for n in -nb..=nb {
                if (n * n) as f64 + (m * m) as f64 * g <= t * t {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_sharp(&EllipseLattice::new(1.0).unwrap(), 1.0), 5);
        assert_eq!(count_sharp(&EllipseLattice::new(2.0).unwrap(), 2.0), 7);
        let lat = EllipseLattice::new(2f64.sqrt()).unwrap();
        let n = count_sharp(&lat, 50.0);
        assert_eq!(n, brute_count(2f64.sqrt(), 50.0));
        let area = PI * 2500.0 / lat.det_d;
        assert!((0.99..=1.01).contains(&(n as f64 / area)));
    }

    #[test]
    fn origin_and_open_ball() {
        let lat = EllipseLattice::new(1.0).unwrap();
        assert_eq!(count_sharp(&lat, 0.0), 1);
        assert_eq!(count_open(&lat, 1.0), 1);
        assert_eq!(count_open(&lat, 5.0) + 12, count_sharp(&lat, 5.0));
    }

    #[test]
    fn empty_annulus_gives_negative_area_term() {
        let lat = EllipseLattice::new(1.0).unwrap();
        // no vector has 1.1 < |v| ≤ 1.2
        let (t, rho) = (1.1, 0.1);
        let s = remainder_sharp(&lat, t, rho).unwrap();
        assert_eq!(s, -annulus_area(&lat, t, rho) / t.sqrt());
        assert!(remainder_sharp(&lat, 0.0, 0.1).is_err());
        assert!(remainder_sharp(&lat, -1.0, 0.1).is_err());
    }

    #[test]
    fn remainder_matches_brute_annulus() {
        let a = 2f64.sqrt();
        let lat = EllipseLattice::new(a).unwrap();
        let (t, rho) = (100.0, 0.05);
        let count = brute_count(a, t + rho) - brute_count(a, t);
        let want = (count as f64 - PI / a * (2.0 * t * rho + rho * rho)) / t.sqrt();
        assert!((remainder_sharp(&lat, t, rho).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn mean_remainder_vanishes() {
        let lat = EllipseLattice::new(2f64.sqrt()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let rho = 1.0 / 20.0;
        let xs: Vec<f64> = (0..n)
            .map(|_| remainder_sharp(&lat, rng.random_range(2000.0..4000.0), rho).unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let stderr = (var / n as f64).sqrt();
        assert!(mean.abs() <= 3.0 * stderr, "mean {mean}, stderr {stderr}");
    }

    #[test]
    fn params_default_m() {
        let p = AnnulusParams::new(1e4, 30.0, None).unwrap();
        assert_eq!(p.M, 27_000.0);
        assert_eq!(p.rho * p.L, 1.0);
        assert!(AnnulusParams::new(0.0, 30.0, None).is_err());
    }

    proptest! {
        #[test]
        fn matches_box_scan(a in 0.3f64..3.0, t in 1.0f64..200.0) {
            let lat = EllipseLattice::new(a).unwrap();
            prop_assert_eq!(count_sharp(&lat, t), brute_count(a, t));
        }

        #[test]
        fn monotone_in_t(a in 0.3f64..3.0, t in 0.0f64..100.0, dt in 0.0f64..5.0) {
            let lat = EllipseLattice::new(a).unwrap();
            prop_assert!(count_sharp(&lat, t) <= count_sharp(&lat, t + dt));
        }

        #[test]
        fn remainder_reconstructs_integer_count(a in 0.3f64..3.0, t in 1.0f64..500.0, rho in 0.001f64..1.0) {
            let lat = EllipseLattice::new(a).unwrap();
            let s = remainder_sharp(&lat, t, rho).unwrap();
            let k = t.sqrt() * s + annulus_area(&lat, t, rho);
            prop_assert!((k - k.round()).abs() < 1e-6);
            prop_assert_eq!(k.round() as u64, count_sharp(&lat, t + rho) - count_sharp(&lat, t));
        }
    }
}
