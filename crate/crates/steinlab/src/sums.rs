//! Compensated (Neumaier) summation, used wherever long f64 sums feed
//! tolerances near machine precision.

/// Running Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut acc = Accumulator::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_heavy_sum() {
        // 1 + 2^-60 repeated, then -1: naive summation drops the dust entirely
        let mut acc = Accumulator::new();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(2f64.powi(-60));
        }
        acc.add(-1.0);
        let want = 1000.0 * 2f64.powi(-60);
        assert!((acc.value() - want).abs() < 1e-21);
    }

    #[test]
    fn slice_sum() {
        assert_eq!(compensated_sum(&[0.25, 0.5, 0.25]), 1.0);
    }
}
