use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::asymptotics::LimitLaw;
use crate::error::StatsError;

/// Rejection level of every KS test.
pub const KS_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    #[serde(rename = "D")]
    pub statistic: f64,
    pub n: usize,
    /// Second sample size for a two-sample test.
    pub m: Option<usize>,
    #[serde(rename = "p")]
    pub p_value: f64,
    pub reject: bool,
    /// Reference law, or `"two-sample"`.
    pub reference: String,
}

/// `F(x) = #{x_i <= x} / n` on each grid point.
pub fn empirical_cdf(sample: &[f64], grid: &[f64]) -> Result<Vec<f64>, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let sorted = sorted(sample);
    let n = sorted.len() as f64;
    Ok(grid
        .iter()
        .map(|&t| sorted.partition_point(|&x| x <= t) as f64 / n)
        .collect())
}

fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Kolmogorov survival `P(K > lambda)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series, fast for small lambda
        let s: f64 = (1..=20)
            .map(|k| {
                let j = f64::from(2 * k - 1);
                (-(j * j) * PI * PI / (8.0 * lambda * lambda)).exp()
            })
            .sum();
        (1.0 - (2.0 * PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let kf = f64::from(k);
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * kf * kf * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Asymptotic p-value with Stephens' small-sample correction.
fn p_value(d: f64, effective_n: f64) -> f64 {
    let root = effective_n.sqrt();
    kolmogorov_q((root + 0.12 + 0.11 / root) * d)
}

/// One-sample test against `law`, taking atoms into account.
pub fn ks_one_sample(sample: &[f64], law: &LimitLaw) -> Result<KsReport, StatsError> {
    ks_one_sample_with(sample, |t| law.cdf(t), |t| law.cdf_left(t), &law.to_string())
}

/// One-sample test against a cdf given by its right- and left-continuous
/// versions. `D` is the supremum of `|F_n - F|` over both sides of every
/// sample point.
pub fn ks_one_sample_with(
    sample: &[f64],
    cdf: impl Fn(f64) -> f64,
    cdf_left: impl Fn(f64) -> f64,
    reference: &str,
) -> Result<KsReport, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let xs = sorted(sample);
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let x = xs[i];
        let mut j = i;
        while j < n && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / nf;
        let at = j as f64 / nf;
        d = d.max((below - cdf_left(x)).abs()).max((at - cdf(x)).abs());
        i = j;
    }
    let p = p_value(d, nf);
    Ok(KsReport {
        statistic: d,
        n,
        m: None,
        p_value: p,
        reject: p < KS_LEVEL,
        reference: reference.to_string(),
    })
}

/// Two-sample test; `D` is taken over all merged jump points.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsReport, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let (xa, xb) = (sorted(a), sorted(b));
    let (n, m) = (xa.len(), xb.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n || j < m {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < n && xa[i] == x {
            i += 1;
        }
        while j < m && xb[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let effective = (n * m) as f64 / (n + m) as f64;
    let p = p_value(d, effective);
    Ok(KsReport {
        statistic: d,
        n,
        m: Some(m),
        p_value: p,
        reject: p < KS_LEVEL,
        reference: "two-sample".into(),
    })
}
