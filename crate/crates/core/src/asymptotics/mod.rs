//! Rate-law algebra, regime classification, scaling factors and the limit
//! distributions the scaled outcomes converge to.
//!
//! Rates are laws `c * N^p * (log2 N)^q`; every logarithm here is base 2,
//! matching `log N = l` for `N = 2^l`.

mod laws;
mod quad;
mod rate;
mod ratesum;
mod regime;

pub use laws::LimitLaw;
pub use rate::{compare_orders, OrderRelation, RateExpr};
pub use ratesum::{
    successful_rate_asymptote, successful_rate_asymptote_log2, successful_rate_sum, successful_rate_sum_log2,
    SignedLog2,
};
pub use regime::{classify_null, classify_theorem1, scaling_factor, Case, RateLaws, Regime, Scaling};
