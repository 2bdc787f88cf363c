//! Rates of successful daughter type-1 mutations,
//! `sum_{i in (l b1, l b2]} v1 2^(i-1) (1 - exp(-C v2 (2^(l-i+1) - C')))`,
//! and their large-`N` asymptote `C (b2 - max(b1, 1 - alpha))^+ v1 v2 N log2 N`.
//!
//! Both are evaluated as base-2 logarithms so that `l` in the tens of
//! thousands neither overflows `2^i` nor underflows `N^-alpha`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

/// A real number stored as a sign and `log2 |x|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLog2 {
    /// -1, 0 or 1.
    pub sign: i8,
    pub log2_abs: f64,
}

impl SignedLog2 {
    pub const ZERO: SignedLog2 = SignedLog2 {
        sign: 0,
        log2_abs: f64::NEG_INFINITY,
    };

    pub fn positive(log2_abs: f64) -> Self {
        SignedLog2 { sign: 1, log2_abs }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            SignedLog2::ZERO
        } else {
            SignedLog2 {
                sign: if x > 0.0 { 1 } else { -1 },
                log2_abs: x.abs().log2(),
            }
        }
    }

    /// May overflow to infinity or underflow to zero.
    pub fn to_f64(self) -> f64 {
        f64::from(self.sign) * self.log2_abs.exp2()
    }

    /// `self / other`, computed without leaving the log domain.
    pub fn ratio(self, other: SignedLog2) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        f64::from(self.sign * other.sign) * (self.log2_abs - other.log2_abs).exp2()
    }
}

/// `log2 sum 2^x` over a nonempty slice.
fn log2_sum(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + logs.iter().map(|&x| (x - max).exp2()).sum::<f64>().log2()
}

/// Signed `log2 (2^k - c_prime)`.
fn log2_descendant_count(k: u64, c_prime: f64) -> SignedLog2 {
    if k <= 60 {
        return SignedLog2::from_f64((1u64 << k) as f64 - c_prime);
    }
    // 2^k (1 - c' 2^-k) with c' 2^-k far below one
    let correction = (-c_prime * (-(k as f64)).exp2()).ln_1p() / LN_2;
    SignedLog2::positive(k as f64 + correction)
}

/// Signed `log2 (1 - exp(-x))` given `x` in signed log form.
fn log2_success_probability(x: SignedLog2) -> SignedLog2 {
    match x.sign {
        0 => SignedLog2::ZERO,
        1 => {
            if x.log2_abs > 11.0 {
                // exp(-2048) is far below one ulp of 1
                SignedLog2::positive(0.0)
            } else if x.log2_abs < -1000.0 {
                SignedLog2::positive(x.log2_abs)
            } else {
                SignedLog2::positive((-(-x.log2_abs.exp2()).exp_m1()).log2())
            }
        }
        _ => {
            // 1 - exp(|x|) < 0
            let log2_magnitude = if x.log2_abs < -1000.0 {
                x.log2_abs
            } else {
                let ax = x.log2_abs.exp2();
                if ax > 700.0 {
                    ax / LN_2
                } else {
                    ax.exp_m1().log2()
                }
            };
            SignedLog2 {
                sign: -1,
                log2_abs: log2_magnitude,
            }
        }
    }
}

fn index_range(l: u64, beta1: f64, beta2: f64) -> std::ops::RangeInclusive<u64> {
    let lf = l as f64;
    let lo = ((lf * beta1).floor().max(0.0) as u64) + 1;
    let hi = ((lf * beta2).floor().max(0.0) as u64).min(l);
    lo..=hi
}

/// Rate sum from base-2 logarithms of `v1` and `v2`.
pub fn successful_rate_sum_log2(
    l: u64,
    log2_v1: f64,
    log2_v2: f64,
    c: f64,
    c_prime: f64,
    beta1: f64,
    beta2: f64,
) -> SignedLog2 {
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for i in index_range(l, beta1, beta2) {
        let count = log2_descendant_count(l - i + 1, c_prime);
        if count.sign == 0 {
            continue;
        }
        let x = SignedLog2 {
            sign: count.sign,
            log2_abs: c.log2() + log2_v2 + count.log2_abs,
        };
        let success = log2_success_probability(x);
        let term = log2_v1 + (i - 1) as f64 + success.log2_abs;
        match success.sign {
            1 => positive.push(term),
            -1 => negative.push(term),
            _ => {}
        }
    }
    let pos = log2_sum(&positive);
    let neg = log2_sum(&negative);
    if pos == neg {
        return SignedLog2::ZERO;
    }
    let (sign, big, small) = if pos > neg { (1, pos, neg) } else { (-1, neg, pos) };
    SignedLog2 {
        sign,
        log2_abs: big + (-(small - big).exp2()).ln_1p() / LN_2,
    }
}

/// Rate sum at ordinary floating-point rates.
pub fn successful_rate_sum(l: u32, v1: f64, v2: f64, c: f64, c_prime: f64, beta1: f64, beta2: f64) -> f64 {
    if v1 == 0.0 || v2 == 0.0 {
        return 0.0;
    }
    successful_rate_sum_log2(u64::from(l), v1.log2(), v2.log2(), c, c_prime, beta1, beta2).to_f64()
}

/// Asymptote from base-2 logarithms of `v1` and `v2`.
pub fn successful_rate_asymptote_log2(
    l: u64,
    log2_v1: f64,
    log2_v2: f64,
    alpha: f64,
    c: f64,
    beta1: f64,
    beta2: f64,
) -> SignedLog2 {
    let width = (beta2 - beta1.max(1.0 - alpha)).max(0.0);
    if width == 0.0 {
        return SignedLog2::ZERO;
    }
    let lf = l as f64;
    SignedLog2::positive(c.log2() + width.log2() + log2_v1 + log2_v2 + lf + lf.log2())
}

pub fn successful_rate_asymptote(l: u32, v1: f64, v2: f64, alpha: f64, c: f64, beta1: f64, beta2: f64) -> f64 {
    if v1 == 0.0 || v2 == 0.0 {
        return 0.0;
    }
    successful_rate_asymptote_log2(u64::from(l), v1.log2(), v2.log2(), alpha, c, beta1, beta2).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Error-free transformation sum, accumulating in double-double.
    fn dd_sum(terms: impl Iterator<Item = f64>) -> f64 {
        let (mut hi, mut lo) = (0.0f64, 0.0f64);
        for x in terms {
            let s = hi + x;
            let bb = s - hi;
            let err = (hi - (s - bb)) + (x - bb);
            hi = s;
            lo += err;
        }
        hi + lo
    }

    fn direct(l: u32, v1: f64, v2: f64, c: f64, c_prime: f64, beta1: f64, beta2: f64) -> f64 {
        dd_sum((1..=l).filter(|&i| f64::from(i) > f64::from(l) * beta1 && f64::from(i) <= f64::from(l) * beta2).map(
            |i| {
                let x = c * v2 * ((1u64 << (l - i + 1)) as f64 - c_prime);
                v1 * (1u64 << (i - 1)) as f64 * (1.0 - (-x).exp())
            },
        ))
    }

    #[test]
    fn matches_direct_summation() {
        let v = (-10.0f64).exp2();
        let fast = successful_rate_sum(20, v, v, 1.0, 2.0, 0.0, 1.0);
        let reference = direct(20, v, v, 1.0, 2.0, 0.0, 1.0);
        assert!(((fast - reference) / reference).abs() < 1e-12, "{fast} vs {reference}");
    }

    #[test]
    fn heuristic_rate_and_partial_ranges() {
        let (v1, v2) = (1e-3, 2e-2);
        for &(b1, b2) in &[(0.0, 1.0), (0.25, 0.75), (0.5, 1.0)] {
            let fast = successful_rate_sum(12, v1, v2, 1.0, 2.0, b1, b2);
            let reference = direct(12, v1, v2, 1.0, 2.0, b1, b2);
            assert!(((fast - reference) / reference).abs() < 1e-12);
        }
        assert_eq!(successful_rate_sum(12, v1, v2, 1.0, 2.0, 0.4, 0.4), 0.0);
    }

    #[test]
    fn signed_terms() {
        // C' = 5 makes the last two generations' terms negative
        let (v1, v2) = (0.01, 0.05);
        let fast = successful_rate_sum(6, v1, v2, 1.5, 5.0, 0.0, 1.0);
        let reference = direct(6, v1, v2, 1.5, 5.0, 0.0, 1.0);
        assert!(((fast - reference) / reference).abs() < 1e-12, "{fast} vs {reference}");
        let only_negative = successful_rate_sum(6, v1, v2, 1.0, 5.0, 5.0 / 6.0, 1.0);
        assert!(only_negative < 0.0);
        assert!(((only_negative - direct(6, v1, v2, 1.0, 5.0, 5.0 / 6.0, 1.0)) / only_negative).abs() < 1e-12);
    }

    #[test]
    fn asymptote_examples() {
        assert_eq!(successful_rate_asymptote(16, 1e-3, 1e-2, 0.5, 1.0, 0.0, 0.4), 0.0);
        let full = successful_rate_asymptote(16, 1e-3, 1e-2, 1.5, 1.0, 0.0, 1.0);
        assert!(((full - 1e-5 * 65536.0 * 16.0) / full).abs() < 1e-13);
    }

    #[test]
    fn large_l_stays_finite() {
        let l = 10_000u64;
        let half = -(l as f64) / 2.0;
        let sum = successful_rate_sum_log2(l, half, half, 1.0, 2.0, 0.0, 1.0);
        let asym = successful_rate_asymptote_log2(l, half, half, 0.5, 1.0, 0.0, 1.0);
        let ratio = sum.ratio(asym);
        assert!(ratio.is_finite() && ratio > 0.9 && ratio < 1.1, "{ratio}");
    }
}
