//! Complex gamma and Hurwitz zeta functions.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex gamma function (Lanczos, g = 7, with reflection for `Re z < 1/2`).
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        return pi / ((pi * z).sin() * gamma(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// `B_{2j} / (2j)!` for `j = 1..=15`.
const BERNOULLI_OVER_FACTORIAL: [f64; 15] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3_617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
    77_683.0 / 14_101_100_039_391_805_440_000.0,
    -236_364_091.0 / 1_693_824_136_731_743_669_452_800_000.0,
    657_931.0 / 186_134_520_519_971_831_808_000_000.0,
    -3_392_780_147.0 / 37_893_265_687_455_865_519_472_640_000_000.0,
    1_723_168_255_201.0 / 759_790_291_646_040_068_357_842_010_112_000_000.0,
];

/// Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (k + q)^{-s}` for real `q > 0`, `s ≠ 1`,
/// by Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: Complex64, q: f64) -> Complex64 {
    debug_assert!(q > 0.0);
    let n = (20.0 + s.norm()).ceil() as usize;
    let mut head = Complex64::new(0.0, 0.0);
    for k in 0..n {
        head += (-s * (q + k as f64).ln()).exp();
    }
    let a = q + n as f64;
    let ln_a = a.ln();
    let a_pow = (-s * ln_a).exp(); // a^{-s}
    let mut sum = head + a_pow * a / (s - 1.0) + 0.5 * a_pow;
    // Σ_j B_{2j}/(2j)! · s(s+1)···(s+2j-2) · a^{-s-2j+1}
    let mut rising = s; // s(s+1)...(s+2j-2)
    let mut power = a_pow / a; // a^{-s-1}
    let inv_a2 = 1.0 / (a * a);
    for (j, &b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = b * rising * power;
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
        let m = 2.0 * (j as f64 + 1.0);
        rising = rising * (s + (m - 1.0)) * (s + m);
        power *= inv_a2;
    }
    sum
}

/// Riemann zeta `ζ(s)` for `s ≠ 1`.
pub fn riemann_zeta(s: Complex64) -> Complex64 {
    hurwitz_zeta(s, 1.0)
}
