use num_complex::Complex64;

/// Kahan compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline(always)]
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum - self.c
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Four interleaved Kahan lanes, merged in a fixed order.
///
/// Term `j` always lands in lane `j % 4`, so the result depends only on the
/// term order, never on how the caller was scheduled.
#[derive(Clone, Copy, Debug, Default)]
pub struct LaneSum {
    lanes: [KahanSum; 4],
}

impl LaneSum {
    #[inline(always)]
    pub fn add_chunk4(&mut self, xs: [f64; 4]) {
        for (lane, x) in self.lanes.iter_mut().zip(xs) {
            lane.add(x);
        }
    }

    pub fn add_tail(&mut self, xs: &[f64]) {
        for (lane, &x) in self.lanes.iter_mut().zip(xs) {
            lane.add(x);
        }
    }

    pub fn value(&self) -> f64 {
        let mut acc = KahanSum::new();
        for lane in &self.lanes {
            acc.add(lane.sum);
            acc.add(-lane.c);
        }
        acc.value()
    }
}

/// Kahan accumulator for complex terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexKahanSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahanSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms_lost_by_naive_summation() {
        let mut acc = KahanSum::new();
        let mut naive = 0.0;
        acc.add(1.0);
        naive += 1.0;
        for _ in 0..10_000 {
            acc.add(1e-16);
            naive += 1e-16;
        }
        assert_eq!(naive, 1.0);
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-24);
    }

    #[test]
    fn lane_sum_matches_kahan_on_benign_input() {
        let xs: Vec<f64> = (1..=1003).map(|i| 1.0 / i as f64).collect();
        let mut lanes = LaneSum::default();
        let mut chunks = xs.chunks_exact(4);
        for c in &mut chunks {
            lanes.add_chunk4([c[0], c[1], c[2], c[3]]);
        }
        lanes.add_tail(chunks.remainder());
        let reference: KahanSum = xs.iter().copied().collect();
        assert!((lanes.value() - reference.value()).abs() < 1e-14);
    }
}
