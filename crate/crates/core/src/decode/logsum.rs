//! Correctly rounded summation of log-probabilities.
//!
//! Sequence scores are sums of many `ln p` terms. Summing them naively makes
//! the result depend on grouping, so a joint score would differ in the last
//! bits from the score of the concatenated sequence. [`ExactSum`] keeps
//! non-overlapping partials (Shewchuk) and rounds once at the end, so every
//! grouping of the same terms yields the same `f64`.

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactSum {
    partials: Vec<f64>,
    neg_inf: bool,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one term. `-inf` (a zero-probability token) is absorbing.
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            self.neg_inf = true;
            return;
        }
        debug_assert!(x.is_finite(), "non-finite log-probability {x}");
        let mut x = x;
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn with(&self, x: f64) -> ExactSum {
        let mut s = self.clone();
        s.add(x);
        s
    }

    /// Adds every term of `other`; the result is exact.
    pub fn merge(&mut self, other: &ExactSum) {
        self.neg_inf |= other.neg_inf;
        for &x in &other.partials {
            self.add(x);
        }
    }

    /// The correctly rounded value of the exact sum.
    pub fn value(&self) -> f64 {
        if self.neg_inf {
            return f64::NEG_INFINITY;
        }
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Round-half-even correction when the remaining partials push the
        // result past a halfway point.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = ExactSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn repeated_terms_match_multiplication() {
        for v in [2.0f64, 3.0, 4.0, 5.0, 7.0, 10.0] {
            let x = (1.0 / v).ln();
            for n in 1..200u32 {
                let s: ExactSum = std::iter::repeat_n(x, n as usize).collect();
                assert_eq!(s.value(), f64::from(n) * x, "|V|={v} n={n}");
            }
        }
    }

    #[test]
    fn cancellation() {
        let s: ExactSum = [1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 1.0);
        assert_eq!(ExactSum::new().value(), 0.0);
    }

    #[test]
    fn neg_infinity_absorbs() {
        let s: ExactSum = [-1.0, f64::NEG_INFINITY, -2.0].into_iter().collect();
        assert_eq!(s.value(), f64::NEG_INFINITY);
    }

    proptest! {
        #[test]
        fn grouping_does_not_matter(xs in proptest::collection::vec(-50.0f64..0.0, 0..40), split in 0usize..40) {
            let split = split.min(xs.len());
            let whole: ExactSum = xs.iter().copied().collect();
            let mut left: ExactSum = xs[..split].iter().copied().collect();
            let right: ExactSum = xs[split..].iter().copied().collect();
            // Adding the rounded halves is within one rounding of the whole.
            let approx = left.value() + right.value();
            prop_assert!((approx - whole.value()).abs() <= 1e-12 * whole.value().abs().max(1.0));
            for x in &xs[split..] {
                left.add(*x);
            }
            prop_assert_eq!(left.value(), whole.value());
            let mut merged: ExactSum = xs[..split].iter().copied().collect();
            merged.merge(&xs[split..].iter().copied().collect());
            prop_assert_eq!(merged.value(), whole.value());
        }
    }
}
