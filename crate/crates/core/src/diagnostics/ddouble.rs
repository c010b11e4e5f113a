//! Just enough double-double arithmetic to evaluate `1/√a − 1/√b` when `a ≈ b`.
//!
//! In plain `f64` the difference loses about `log10(b/(b − a))` digits, which
//! breaks a 1e-12 relative comparison once the accumulator has grown by more
//! than ~10⁴ times the latest increment.

/// An unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    DoubleDouble { hi: s, lo: err }
}

fn quick_two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    DoubleDouble {
        hi: s,
        lo: b - (s - a),
    }
}

impl DoubleDouble {
    /// `1/√x` to roughly 100 bits, by one Newton step from the `f64` estimate.
    pub fn inv_sqrt(x: f64) -> Self {
        debug_assert!(x > 0.0 && x.is_finite());
        let r = 1.0 / x.sqrt();
        // residual 1 − x·r², with r² carried exactly as p + pe
        let p = r * r;
        let pe = r.mul_add(r, -p);
        let t = (-x).mul_add(p, 1.0) - x * pe;
        quick_two_sum(r, 0.5 * r * t)
    }

    pub fn sub(self, other: Self) -> Self {
        let s = two_sum(self.hi, -other.hi);
        let lo = s.lo + (self.lo - other.lo);
        quick_two_sum(s.hi, lo)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `1/√a − 1/√b`, accurate to a few ulps even under heavy cancellation.
pub(crate) fn inv_sqrt_diff(a: f64, b: f64) -> f64 {
    DoubleDouble::inv_sqrt(a)
        .sub(DoubleDouble::inv_sqrt(b))
        .to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_square_roots_of_squares() {
        for k in [1.0f64, 4.0, 9.0, 1e10, 0.25] {
            let dd = DoubleDouble::inv_sqrt(k);
            assert_eq!(dd.to_f64(), 1.0 / k.sqrt());
        }
        let dd = DoubleDouble::inv_sqrt(4.0);
        assert_eq!((dd.hi, dd.lo), (0.5, 0.0));
    }

    #[test]
    fn cancellation_is_resolved() {
        // 1/√a − 1/√(a(1+h)) = (1 − (1+h)^{−1/2})/√a ≈ h/(2√a) − 3h²/(8√a)
        let a: f64 = 1e8;
        let h = 1e-12;
        let b = a * (1.0 + h);
        let exact_h = (b - a) / a; // b is rounded, so use the realised ratio
        let expect = (exact_h / 2.0 - 3.0 * exact_h * exact_h / 8.0) / a.sqrt();
        let got = inv_sqrt_diff(a, b);
        assert!(((got - expect) / expect).abs() < 1e-9, "{got} vs {expect}");
    }

    #[test]
    fn simple_differences() {
        assert!((inv_sqrt_diff(4.0, 9.0) - 1.0 / 6.0).abs() < 1e-17);
        assert_eq!(inv_sqrt_diff(3.0, 3.0), 0.0);
    }
}
