use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::AsymptoticsError;

/// Exponents are compared on a grid of this spacing so that sums and halves
/// of decimal exponents (e.g. `-1.2 + -0.5`) compare as intended.
const EXPONENT_GRID: f64 = 1e-9;

/// A rate law `c * N^p * (log2 N)^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct RateExpr {
    pub c: f64,
    pub p: f64,
    pub q: f64,
}

impl TryFrom<[f64; 3]> for RateExpr {
    type Error = AsymptoticsError;

    fn try_from([c, p, q]: [f64; 3]) -> Result<Self, Self::Error> {
        RateExpr::new(c, p, q)
    }
}

impl From<RateExpr> for [f64; 3] {
    fn from(r: RateExpr) -> Self {
        [r.c, r.p, r.q]
    }
}

/// Outcome of comparing the orders of two rate laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderRelation {
    MuchLess,
    SameOrder { ratio: f64 },
    MuchGreater,
}

impl RateExpr {
    pub fn new(c: f64, p: f64, q: f64) -> Result<Self, AsymptoticsError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(AsymptoticsError::InvalidCoefficient(c));
        }
        if !(p.is_finite() && q.is_finite()) {
            return Err(AsymptoticsError::InvalidExponent { p, q });
        }
        Ok(RateExpr { c, p, q })
    }

    /// `N^p (log2 N)^q` with unit coefficient.
    pub fn power(p: f64, q: f64) -> Self {
        RateExpr { c: 1.0, p, q }
    }

    pub fn constant(c: f64) -> Self {
        RateExpr { c, p: 0.0, q: 0.0 }
    }

    pub fn mul(self, other: RateExpr) -> Self {
        RateExpr {
            c: self.c * other.c,
            p: self.p + other.p,
            q: self.q + other.q,
        }
    }

    /// Multiplies by `N^a (log2 N)^b`.
    pub fn scale(self, a: f64, b: f64) -> Self {
        RateExpr {
            c: self.c,
            p: self.p + a,
            q: self.q + b,
        }
    }

    pub fn sqrt(self) -> Self {
        RateExpr {
            c: self.c.sqrt(),
            p: self.p / 2.0,
            q: self.q / 2.0,
        }
    }

    /// Value at `N = 2^l`.
    pub fn eval(&self, l: u32) -> f64 {
        self.c * (self.p * f64::from(l)).exp2() * f64::from(l).powf(self.q)
    }

    fn key(&self) -> (i64, i64) {
        ((self.p / EXPONENT_GRID).round() as i64, (self.q / EXPONENT_GRID).round() as i64)
    }
}

impl fmt::Display for RateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*N^{}*log2(N)^{}", self.c, self.p, self.q)
    }
}

/// Asymptotic comparison as `N -> infinity`, lexicographic on `(p, q)`.
pub fn compare_orders(a: &RateExpr, b: &RateExpr) -> OrderRelation {
    match a.key().cmp(&b.key()) {
        Ordering::Less => OrderRelation::MuchLess,
        Ordering::Greater => OrderRelation::MuchGreater,
        Ordering::Equal => OrderRelation::SameOrder { ratio: a.c / b.c },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(c: f64, p: f64, q: f64) -> RateExpr {
        RateExpr::new(c, p, q).unwrap()
    }

    #[test]
    fn comparison_examples() {
        assert_eq!(compare_orders(&r(1.0, -1.7, 0.0), &r(1.0, -1.0, -2.0)), OrderRelation::MuchLess);
        assert_eq!(
            compare_orders(&r(2.0, -0.5, -1.0), &r(1.0, -0.5, -1.0)),
            OrderRelation::SameOrder { ratio: 2.0 }
        );
        assert_eq!(compare_orders(&r(1.0, -1.0, 0.0), &r(1.0, -1.0, 1.0)), OrderRelation::MuchLess);
    }

    #[test]
    fn derived_exponents_compare_exactly() {
        let p = r(1.0, -1.2, 0.0).mul(r(1.0, -0.5, 0.0)).scale(1.0, 1.0);
        assert!(matches!(compare_orders(&p, &r(3.0, -0.7, 1.0)), OrderRelation::SameOrder { .. }));
        let s = r(4.0, -0.6, 0.0).mul(r(1.0, -0.8, 0.0)).scale(1.0, 0.0).sqrt();
        assert_eq!(compare_orders(&s, &r(2.0, -0.2, 0.0)), OrderRelation::SameOrder { ratio: 1.0 });
    }

    #[test]
    fn rejects_bad_laws() {
        assert!(RateExpr::new(0.0, -1.0, 0.0).is_err());
        assert!(RateExpr::new(1.0, f64::NAN, 0.0).is_err());
        assert!(serde_json::from_str::<RateExpr>("[-1.0, 0.0, 0.0]").is_err());
        let back: RateExpr = serde_json::from_str("[2.0, -0.5, -1.0]").unwrap();
        assert_eq!(back, r(2.0, -0.5, -1.0));
    }

    #[test]
    fn eval_at_n() {
        let e = r(3.0, -0.5, -1.0).eval(16);
        assert!((e - 3.0 / (256.0 * 16.0)).abs() < 1e-18);
    }

    fn rate() -> impl Strategy<Value = RateExpr> {
        // a small exponent lattice makes ties frequent
        (0.1f64..10.0, -6i32..=2, -4i32..=4).prop_map(|(c, p, q)| r(c, f64::from(p) * 0.25, f64::from(q) * 0.5))
    }

    fn rank(o: OrderRelation) -> i32 {
        match o {
            OrderRelation::MuchLess => -1,
            OrderRelation::SameOrder { .. } => 0,
            OrderRelation::MuchGreater => 1,
        }
    }

    proptest! {
        #[test]
        fn total_preorder(a in rate(), b in rate(), c in rate()) {
            prop_assert_eq!(rank(compare_orders(&a, &b)), -rank(compare_orders(&b, &a)));
            prop_assert_eq!(rank(compare_orders(&a, &a)), 0);
            let ab = rank(compare_orders(&a, &b));
            let bc = rank(compare_orders(&b, &c));
            if ab <= 0 && bc <= 0 {
                prop_assert!(rank(compare_orders(&a, &c)) <= 0);
                if ab < 0 || bc < 0 {
                    prop_assert_eq!(rank(compare_orders(&a, &c)), -1);
                }
            }
        }

        #[test]
        fn same_order_ratio(a in rate(), k in 0.1f64..10.0) {
            let b = RateExpr { c: a.c * k, ..a };
            match compare_orders(&b, &a) {
                OrderRelation::SameOrder { ratio } => prop_assert!((ratio - k).abs() < 1e-12 * k),
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }
}
