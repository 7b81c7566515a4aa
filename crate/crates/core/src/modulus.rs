//! The multiplicative absolute value `max(x, 1/x)` on the positive reals and
//! its positive/negative part decomposition.

use crate::error::{Error, Result};

/// A strictly positive, finite real.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PositiveReal(f64);

impl PositiveReal {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(PositiveReal(value))
        } else {
            Err(Error::Domain(format!(
                "expected a strictly positive finite real, got {value}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PositiveReal {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        PositiveReal::new(value)
    }
}

/// Multiplicative absolute value: `max(x, 1/x)`, always `>= 1`.
///
/// The branch itself is exact; only the reciprocal rounds.
#[inline]
pub fn mmod(x: PositiveReal) -> f64 {
    let v = x.get();
    v.max(v.recip())
}

/// Multiplicative positive and negative parts `(p, q)` of `x`:
/// `p = (mmod(x) * x)^(1/2)` and `q = (mmod(x) / x)^(1/2)`, so that
/// `p / q = x`, `p * q = mmod(x)`, and both are `>= 1`.
///
/// Evaluated as `exp((log mmod(x) +- log x) / 2)`; the direct product
/// `mmod(x) * x` would overflow for magnitudes near 1e300.
pub fn mparts(x: PositiveReal) -> (f64, f64) {
    let v = x.get();
    let lm = mmod(x).ln();
    let lx = v.ln();
    let p = ((lm + lx) * 0.5).exp();
    let q = ((lm - lx) * 0.5).exp();
    (p, q)
}

/// `log mmod(a)` for an already-computed `log a`.
///
/// Identical to `|log a|`; analyses use this form so the raw product and its
/// mmod transform share one evaluation of each factor.
#[inline]
pub fn log_mmod_from_log(log_a: f64) -> f64 {
    log_a.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rel_dev;
    use proptest::prelude::*;

    fn pos(v: f64) -> PositiveReal {
        PositiveReal::new(v).unwrap()
    }

    #[test]
    fn mmod_examples() {
        assert_eq!(mmod(pos(2.0)), 2.0);
        assert_eq!(mmod(pos(0.5)), 2.0);
        assert_eq!(mmod(pos(1.0)), 1.0);
    }

    #[test]
    fn mparts_examples() {
        let (p, q) = mparts(pos(4.0));
        assert!(rel_dev(p, 4.0) < 1e-12);
        assert!(rel_dev(q, 1.0) < 1e-12);

        let (p, q) = mparts(pos(0.25));
        assert!(rel_dev(p, 1.0) < 1e-12);
        assert!(rel_dev(q, 4.0) < 1e-12);

        let (p, q) = mparts(pos(1.0));
        assert_eq!((p, q), (1.0, 1.0));
    }

    #[test]
    fn rejects_non_positive_input() {
        assert!(PositiveReal::new(0.0).is_err());
        assert!(PositiveReal::new(-2.0).is_err());
        assert!(PositiveReal::new(f64::NAN).is_err());
        assert!(PositiveReal::new(f64::INFINITY).is_err());
    }

    #[test]
    fn mparts_extreme_magnitudes_do_not_overflow() {
        for &v in &[1e300, 1e-300, 7.3e250] {
            let (p, q) = mparts(pos(v));
            assert!(p.is_finite() && q.is_finite());
            assert!(rel_dev(p / q, v) < 1e-12);
            assert!(rel_dev(p * q, mmod(pos(v))) < 1e-12);
        }
    }

    proptest! {
        // Log-uniform samples over [1e-8, 1e8].
        #[test]
        fn modulus_laws(e1 in -8.0f64..8.0, e2 in -8.0f64..8.0) {
            let x = pos(10f64.powf(e1));
            let y = pos(10f64.powf(e2));

            let mx = mmod(x);
            prop_assert!(mx >= 1.0);
            prop_assert_eq!(mx == 1.0, x.get() == 1.0);

            // 1/mmod(x) <= x <= mmod(x)
            prop_assert!(mx.recip() <= x.get() * (1.0 + f64::EPSILON));
            prop_assert!(x.get() <= mx * (1.0 + f64::EPSILON));

            // reciprocal symmetry, 1-ulp slack for the rounded reciprocal
            let minv = mmod(pos(x.get().recip()));
            prop_assert!(rel_dev(mx, minv) <= f64::EPSILON);

            // Submultiplicativity. Both sides round independently (x*y,
            // the reciprocals, the product), so the equality case x,y < 1
            // can land a few ulps apart in either direction.
            let mxy = mmod(pos(x.get() * y.get()));
            prop_assert!(mxy <= mmod(x) * mmod(y) * (1.0 + 4.0 * f64::EPSILON));

            // reconstruction
            let (p, q) = mparts(x);
            prop_assert!(p >= 1.0 - 4.0 * f64::EPSILON && q >= 1.0 - 4.0 * f64::EPSILON);
            prop_assert!(rel_dev(p / q, x.get()) < 1e-12);
            prop_assert!(rel_dev(p * q, mx) < 1e-12);
        }
    }
}
