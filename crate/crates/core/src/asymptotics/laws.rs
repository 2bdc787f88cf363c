use std::fmt;

use serde::{Deserialize, Serialize};

use super::quad::integrate;
use crate::model::RngStream;

/// Below this gap between the two exponential rates the hypoexponential law
/// is evaluated as a Gamma(2, 1).
const HYPOEXP_EQUAL_RATES: f64 = 1e-9;
const QUAD_TOL: f64 = 1e-12;

/// Limit distributions of scaled waiting times and mutation locations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum LimitLaw {
    Exp1,
    /// `P(Y <= t) = 1 - exp(-t^2 / 2)`.
    Rayleigh,
    /// `X + Z` with `X ~ Exp(1)` and `Z ~ Exp(1 / a)` independent.
    Hypoexp { a: f64 },
    /// Scaled waiting time on the null-model boundary `mu ~ A / (sqrt(N) log N)`.
    NullBoundaryTau { a: f64 },
    /// Cancer-causing type-1 location on the same boundary.
    NullBoundarySigma { a: f64 },
    /// Uniform on `(lo, hi]`.
    UniformInterval { lo: f64, hi: f64 },
    PointMass { x: f64 },
    /// `U * xi` with `U ~ Uniform[0, 1]` and `P(xi = 1) = a / (1 + a)`.
    BernoulliMix { a: f64 },
}

impl fmt::Display for LimitLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LimitLaw::Exp1 => write!(f, "Exp(1)"),
            LimitLaw::Rayleigh => write!(f, "Rayleigh"),
            LimitLaw::Hypoexp { a } => write!(f, "Hypoexp(A={a})"),
            LimitLaw::NullBoundaryTau { a } => write!(f, "NullBoundaryTau(A={a})"),
            LimitLaw::NullBoundarySigma { a } => write!(f, "NullBoundarySigma(A={a})"),
            LimitLaw::UniformInterval { lo, hi } => write!(f, "Uniform({lo}, {hi}]"),
            LimitLaw::PointMass { x } => write!(f, "PointMass({x})"),
            LimitLaw::BernoulliMix { a } => write!(f, "BernoulliMix(A={a})"),
        }
    }
}

/// `1 - exp(-x)` without cancellation.
fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

impl LimitLaw {
    /// `P(X <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            LimitLaw::Exp1 => {
                if t <= 0.0 {
                    0.0
                } else {
                    one_minus_exp_neg(t)
                }
            }
            LimitLaw::Rayleigh => {
                if t <= 0.0 {
                    0.0
                } else {
                    one_minus_exp_neg(t * t / 2.0)
                }
            }
            LimitLaw::Hypoexp { a } => hypoexp_cdf(a, t),
            LimitLaw::NullBoundaryTau { a } => {
                let a2 = a * a;
                if t <= 0.0 {
                    0.0
                } else if t <= 0.5 {
                    one_minus_exp_neg(a2 * t * t / 2.0)
                } else {
                    one_minus_exp_neg(a2 * t / 2.0 - a2 / 8.0)
                }
            }
            LimitLaw::NullBoundarySigma { a } => null_sigma_cdf(a, t),
            LimitLaw::UniformInterval { lo, hi } => ((t - lo) / (hi - lo)).clamp(0.0, 1.0),
            LimitLaw::PointMass { x } => {
                if t >= x {
                    1.0
                } else {
                    0.0
                }
            }
            LimitLaw::BernoulliMix { a } => {
                let p0 = 1.0 / (1.0 + a);
                if t < 0.0 {
                    0.0
                } else {
                    (p0 + (1.0 - p0) * t).min(1.0)
                }
            }
        }
    }

    /// `P(X < t)`; differs from [`cdf`](Self::cdf) only at atoms.
    pub fn cdf_left(&self, t: f64) -> f64 {
        match *self {
            LimitLaw::PointMass { x } => {
                if t > x {
                    1.0
                } else {
                    0.0
                }
            }
            LimitLaw::BernoulliMix { .. } if t == 0.0 => 0.0,
            _ => self.cdf(t),
        }
    }

    /// Density, or `None` for laws with atoms.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        let d = match *self {
            LimitLaw::Exp1 => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x).exp()
                }
            }
            LimitLaw::Rayleigh => {
                if x < 0.0 {
                    0.0
                } else {
                    x * (-x * x / 2.0).exp()
                }
            }
            LimitLaw::Hypoexp { a } => hypoexp_pdf(a, x),
            LimitLaw::NullBoundaryTau { a } => {
                let a2 = a * a;
                if x < 0.0 {
                    0.0
                } else if x <= 0.5 {
                    a2 * x * (-a2 * x * x / 2.0).exp()
                } else {
                    a2 / 2.0 * (-a2 * x / 2.0 + a2 / 8.0).exp()
                }
            }
            LimitLaw::NullBoundarySigma { a } => {
                if !(0.5..=1.0).contains(&x) {
                    0.0
                } else {
                    let a2 = a * a;
                    integrate(&|t| a2 * (-a2 * t * t / 2.0).exp(), 1.0 - x, 0.5, QUAD_TOL) + 2.0 * (-a2 / 8.0).exp()
                }
            }
            LimitLaw::UniformInterval { lo, hi } => {
                if x > lo && x <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            LimitLaw::PointMass { .. } | LimitLaw::BernoulliMix { .. } => return None,
        };
        Some(d)
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, LimitLaw::PointMass { .. } | LimitLaw::BernoulliMix { .. })
    }

    /// Draws one value. The two null-boundary laws are sampled from the
    /// limiting Poisson picture rather than by inverting their cdfs, so the
    /// sampler is an independent check of the closed forms.
    pub fn sample(&self, stream: &mut RngStream) -> f64 {
        match *self {
            LimitLaw::Exp1 => stream.exp1(),
            LimitLaw::Rayleigh => (2.0 * stream.exp1()).sqrt(),
            LimitLaw::Hypoexp { a } => stream.exp1() + a * stream.exp1(),
            LimitLaw::NullBoundaryTau { a } => null_boundary_point(a, stream).0,
            LimitLaw::NullBoundarySigma { a } => null_boundary_point(a, stream).1,
            LimitLaw::UniformInterval { lo, hi } => hi - (hi - lo) * stream.uniform(),
            LimitLaw::PointMass { x } => x,
            LimitLaw::BernoulliMix { a } => {
                let p0 = 1.0 / (1.0 + a);
                let u = stream.uniform();
                let v = stream.uniform();
                if u < p0 {
                    0.0
                } else {
                    v
                }
            }
        }
    }
}

fn hypoexp_cdf(a: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let (l1, l2) = (1.0, 1.0 / a);
    if (l1 - l2).abs() < HYPOEXP_EQUAL_RATES {
        return 1.0 - (-t).exp() * (1.0 + t);
    }
    // survival = e^{-l1 t} + l1 (e^{-l1 t} - e^{-l2 t}) / (l2 - l1)
    let e1 = (-l1 * t).exp();
    let gap = -e1 * (-(l2 - l1) * t).exp_m1();
    1.0 - (e1 + l1 * gap / (l2 - l1))
}

fn hypoexp_pdf(a: f64, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let (l1, l2) = (1.0, 1.0 / a);
    if (l1 - l2).abs() < HYPOEXP_EQUAL_RATES {
        return t * (-t).exp();
    }
    let e1 = (-l1 * t).exp();
    l1 * l2 * (-e1 * (-(l2 - l1) * t).exp_m1()) / (l2 - l1)
}

/// `F(s) = int_{1-s}^{1/2} A^2 e^{-A^2 t^2/2} (s - 1 + t) dt + 2 e^{-A^2/8} (s - 1/2)`
/// on `[1/2, 1]`, the density integrated with the order of integration swapped.
fn null_sigma_cdf(a: f64, s: f64) -> f64 {
    if s < 0.5 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a2 = a * a;
    let inner = integrate(&|t| a2 * (-a2 * t * t / 2.0).exp() * (s - 1.0 + t), 1.0 - s, 0.5, QUAD_TOL);
    (inner + 2.0 * (-a2 / 8.0).exp() * (s - 0.5)).min(1.0)
}

/// First hit of the limiting point process: points of intensity `A^2` on
/// `[0, inf) x [1/2, 1]`, each reaching the last generation at `x + 1 - y`.
/// Returns the earliest hit time and the `y` of the point achieving it.
fn null_boundary_point(a: f64, stream: &mut RngStream) -> (f64, f64) {
    // points arrive along x at rate A^2 times the strip height 1/2
    let rate = a * a / 2.0;
    let mut x = 0.0;
    let mut best = (f64::INFINITY, f64::NAN);
    loop {
        x += stream.exponential(rate);
        if x >= best.0 {
            return best;
        }
        let y = 1.0 - 0.5 * stream.uniform();
        let hit = x + 1.0 - y;
        if hit < best.0 {
            best = (hit, y);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_laws() -> Vec<LimitLaw> {
        vec![
            LimitLaw::Exp1,
            LimitLaw::Rayleigh,
            LimitLaw::Hypoexp { a: 1.0 },
            LimitLaw::Hypoexp { a: 2.5 },
            LimitLaw::Hypoexp { a: 0.3 },
            LimitLaw::NullBoundaryTau { a: 2.0 },
            LimitLaw::NullBoundaryTau { a: 0.7 },
            LimitLaw::NullBoundarySigma { a: 3.0 },
            LimitLaw::NullBoundarySigma { a: 0.5 },
            LimitLaw::UniformInterval { lo: 0.5, hi: 1.0 },
            LimitLaw::PointMass { x: 1.0 },
            LimitLaw::BernoulliMix { a: 2.0 },
        ]
    }

    #[test]
    fn cdf_examples() {
        assert!((LimitLaw::Exp1.cdf(std::f64::consts::LN_2) - 0.5).abs() < 1e-15);
        assert_eq!(LimitLaw::Rayleigh.cdf(0.0), 0.0);
        assert!((LimitLaw::Hypoexp { a: 1.0 }.cdf(1.0) - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-15);
        let tau = LimitLaw::NullBoundaryTau { a: 2.0 };
        let expected = 1.0 - (-0.5f64).exp();
        assert!((tau.cdf(0.5) - expected).abs() < 1e-15);
        assert!((tau.cdf(0.5 + 1e-15) - expected).abs() < 1e-12);
    }

    #[test]
    fn hypoexp_branches_agree_near_equal_rates() {
        for &t in &[0.1, 1.0, 3.0, 10.0] {
            let gamma = LimitLaw::Hypoexp { a: 1.0 }.cdf(t);
            let near = LimitLaw::Hypoexp { a: 1.0 + 1e-7 }.cdf(t);
            assert!((gamma - near).abs() < 1e-6, "t={t}");
            let gpdf = LimitLaw::Hypoexp { a: 1.0 }.pdf(t).unwrap();
            let npdf = LimitLaw::Hypoexp { a: 1.0 + 1e-7 }.pdf(t).unwrap();
            assert!((gpdf - npdf).abs() < 1e-6);
        }
    }

    #[test]
    fn hypoexp_matches_convolution() {
        // numeric convolution of Exp(1) and Exp(1/a) densities
        let a = 2.5;
        let t = 1.7;
        let conv = integrate(&|s: f64| (-s).exp() * (-(t - s) / a).exp() / a, 0.0, t, 1e-13);
        assert!((LimitLaw::Hypoexp { a }.pdf(t).unwrap() - conv).abs() < 1e-10);
    }

    #[test]
    fn cdfs_are_distribution_functions() {
        for law in all_laws() {
            let mut prev = 0.0;
            for k in -100..=2000 {
                let t = f64::from(k) * 0.01;
                let f = law.cdf(t);
                assert!((0.0..=1.0).contains(&f), "{law} at {t}");
                assert!(f >= prev - 1e-12, "{law} decreasing at {t}");
                assert!(law.cdf_left(t) <= f + 1e-15);
                prev = f;
            }
            assert_eq!(law.cdf(-1e3), 0.0);
            assert!((law.cdf(1e3) - 1.0).abs() < 1e-12, "{law}");
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for law in all_laws().into_iter().filter(LimitLaw::is_continuous) {
            let (lo, hi) = match law {
                LimitLaw::NullBoundarySigma { .. } | LimitLaw::UniformInterval { .. } => (0.5, 1.0),
                _ => (0.0, 400.0),
            };
            let pdf = |x: f64| law.pdf(x).unwrap();
            // split at the kink of the boundary law
            let total = integrate(&pdf, lo, lo.max(0.5).min(hi), 1e-13) + integrate(&pdf, lo.max(0.5).min(hi), hi, 1e-13);
            assert!((total - 1.0).abs() < 1e-9, "{law}: {total}");
        }
    }

    #[test]
    fn density_matches_cdf_derivative() {
        for law in all_laws().into_iter().filter(LimitLaw::is_continuous) {
            for &x in &[0.55, 0.7, 0.9, 1.3, 2.2] {
                if matches!(law, LimitLaw::NullBoundarySigma { .. } | LimitLaw::UniformInterval { .. }) && x > 0.99 {
                    continue;
                }
                let h = 1e-5;
                let numeric = (law.cdf(x + h) - law.cdf(x - h)) / (2.0 * h);
                let pdf = law.pdf(x).unwrap();
                assert!((numeric - pdf).abs() < 1e-6 * (1.0 + pdf), "{law} at {x}: {numeric} vs {pdf}");
            }
        }
    }

    #[test]
    fn atoms() {
        let mix = LimitLaw::BernoulliMix { a: 2.0 };
        assert!((mix.cdf(0.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mix.cdf_left(0.0), 0.0);
        let pm = LimitLaw::PointMass { x: 0.5 };
        assert_eq!((pm.cdf_left(0.5), pm.cdf(0.5)), (0.0, 1.0));
        assert!(pm.pdf(0.5).is_none());
    }
}
