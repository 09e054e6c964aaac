//! Closed real intervals `[lo, hi]` with the arithmetic used by the
//! interval value functions and the dispatch decision rule.

use serde::{Deserialize, Serialize};

/// A closed interval on the real line, `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Builds `[lo, hi]`, panicking on a malformed pair.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo.is_finite() && hi.is_finite(), "interval endpoints must be finite");
        assert!(lo <= hi, "interval requires lo <= hi, got [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// The degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Self {
        Interval::new(x, x)
    }

    /// `[x - r, x + r]` for `r >= 0`.
    pub fn centered(x: f64, r: f64) -> Self {
        assert!(r >= 0.0, "radius must be nonnegative");
        Interval::new(x - r, x + r)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(self.lo + other.lo, self.hi + other.hi)
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval::new(self.lo - other.hi, self.hi - other.lo)
    }

    /// Scales by a scalar, flipping endpoints for negative factors.
    pub fn scale(&self, k: f64) -> Interval {
        if k >= 0.0 {
            Interval::new(k * self.lo, k * self.hi)
        } else {
            Interval::new(k * self.hi, k * self.lo)
        }
    }

    /// Widens both endpoints outward by `slack >= 0`.
    pub fn widen(&self, slack: f64) -> Interval {
        assert!(slack >= 0.0);
        Interval::new(self.lo - slack, self.hi + slack)
    }

    /// Strict dominance: every point of `self` lies below every point of `other`.
    pub fn strictly_below(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    /// Intersection, or `None` when disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then(|| Interval::new(lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sum_matches_spec_example() {
        let s = Interval::new(1.0, 2.0).add(&Interval::new(3.0, 5.0));
        assert_eq!(s, Interval::new(4.0, 7.0));
    }

    #[test]
    fn scale_flips_sign() {
        let s = Interval::new(-1.0, 2.0).scale(-3.0);
        assert_eq!(s, Interval::new(-6.0, 3.0));
    }

    #[test]
    fn strict_dominance() {
        assert!(Interval::new(0.0, 1.0).strictly_below(&Interval::new(1.5, 2.0)));
        assert!(!Interval::new(0.0, 1.0).strictly_below(&Interval::new(0.5, 2.0)));
    }

    proptest! {
        // Inclusion isotonicity: x in [a], y in [b] implies x + y in [a]+[b],
        // and similarly for subtraction and scaling.
        #[test]
        fn inclusion_isotonic(
            a_lo in -1e6f64..1e6, a_w in 0.0f64..1e3,
            b_lo in -1e6f64..1e6, b_w in 0.0f64..1e3,
            ta in 0.0f64..1.0, tb in 0.0f64..1.0,
            k in -50.0f64..50.0,
        ) {
            let a = Interval::new(a_lo, a_lo + a_w);
            let b = Interval::new(b_lo, b_lo + b_w);
            let x = a.lo + ta * a.width();
            let y = b.lo + tb * b.width();
            prop_assert!(a.add(&b).contains(x + y));
            prop_assert!(a.sub(&b).contains(x - y));
            let scaled = a.scale(k);
            prop_assert!(scaled.lo <= k * x + 1e-9 && k * x <= scaled.hi + 1e-9);
        }
    }
}
