use std::fmt;

use serde::{Deserialize, Serialize};

use super::laws::LimitLaw;
use super::rate::{compare_orders, OrderRelation, RateExpr};
use crate::error::AsymptoticsError;
use crate::model::{CryptConfig, Path};

/// Case of the main theorem or of the null-model proposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum Case {
    #[serde(rename = "T1.1")]
    T1_1,
    #[serde(rename = "T1.2")]
    T1_2,
    #[serde(rename = "T1.3")]
    T1_3,
    #[serde(rename = "T1.4")]
    T1_4,
    #[serde(rename = "T1.5-distinct")]
    T1_5Distinct,
    #[serde(rename = "T1.5-proportional")]
    T1_5Proportional { a: f64 },
    #[serde(rename = "NULL.1")]
    Null1,
    #[serde(rename = "NULL.2")]
    Null2 { a: f64 },
    #[serde(rename = "NULL.3")]
    Null3,
    #[serde(rename = "NULL.4")]
    Null4 { a: f64 },
    #[serde(rename = "NULL.5")]
    Null5,
    #[serde(rename = "NULL.6")]
    Null6 { a: f64 },
    #[serde(rename = "NULL.7")]
    Null7,
    #[serde(rename = "boundary-unsupported")]
    BoundaryUnsupported,
}

impl Case {
    pub fn tag(&self) -> &'static str {
        match self {
            Case::T1_1 => "T1.1",
            Case::T1_2 => "T1.2",
            Case::T1_3 => "T1.3",
            Case::T1_4 => "T1.4",
            Case::T1_5Distinct => "T1.5-distinct",
            Case::T1_5Proportional { .. } => "T1.5-proportional",
            Case::Null1 => "NULL.1",
            Case::Null2 { .. } => "NULL.2",
            Case::Null3 => "NULL.3",
            Case::Null4 { .. } => "NULL.4",
            Case::Null5 => "NULL.5",
            Case::Null6 { .. } => "NULL.6",
            Case::Null7 => "NULL.7",
            Case::BoundaryUnsupported => "boundary-unsupported",
        }
    }

    /// The boundary constant `A`, where the case has one.
    pub fn constant(&self) -> Option<f64> {
        match *self {
            Case::T1_5Proportional { a } | Case::Null2 { a } | Case::Null4 { a } | Case::Null6 { a } => Some(a),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        self.tag().starts_with("NULL")
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Which quantity multiplies `tau` before comparing with the tau law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    /// `(alpha ^ 1) v1 v2 N log N`
    DaughterExponential,
    /// `sqrt(v1 v2 N)`
    DaughterRayleigh,
    /// `u1`
    StemType1,
    /// `mu`
    NullStem,
    /// `(1 + A) mu`
    NullMixed,
    /// `(alpha ^ 1) mu^2 N log N`
    NullExponential,
    /// `1 / log N`
    NullLog,
    /// `sqrt(N) mu`
    NullRayleigh,
    /// No limit law to scale to.
    None,
}

impl Scaling {
    pub fn formula(&self) -> &'static str {
        match self {
            Scaling::DaughterExponential => "(alpha^1)*v1*v2*N*log2(N)",
            Scaling::DaughterRayleigh => "sqrt(v1*v2*N)",
            Scaling::StemType1 => "u1",
            Scaling::NullStem => "mu",
            Scaling::NullMixed => "(1+A)*mu",
            Scaling::NullExponential => "(alpha^1)*mu^2*N*log2(N)",
            Scaling::NullLog => "1/log2(N)",
            Scaling::NullRayleigh => "sqrt(N)*mu",
            Scaling::None => "none",
        }
    }
}

/// A classified parameter regime with its predicted limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub case: Case,
    pub alpha: f64,
    pub scaling: Scaling,
    pub tau_law: Option<LimitLaw>,
    pub sigma_law: Option<LimitLaw>,
    pub rho_law: Option<LimitLaw>,
    /// Mutation path whose probability tends to 1, if any.
    pub path: Option<Path>,
}

impl Regime {
    fn new(case: Case, alpha: f64) -> Self {
        let a_min = alpha.min(1.0);
        let one = Some(LimitLaw::PointMass { x: 1.0 });
        let zero = Some(LimitLaw::PointMass { x: 0.0 });
        let uniform = Some(LimitLaw::UniformInterval {
            lo: (1.0 - alpha).max(0.0),
            hi: 1.0,
        });
        let exp = Some(LimitLaw::Exp1);
        let rayleigh = Some(LimitLaw::Rayleigh);
        let (scaling, tau_law, sigma_law, rho_law, path) = match case {
            Case::T1_1 => (Scaling::DaughterExponential, exp, uniform, one, Some(Path::Dd)),
            Case::T1_2 | Case::T1_3 => (Scaling::DaughterRayleigh, rayleigh, one, one, Some(Path::Dd)),
            Case::T1_4 => (
                Scaling::StemType1,
                exp,
                zero,
                Some(LimitLaw::PointMass { x: a_min }),
                Some(Path::Sd),
            ),
            Case::T1_5Distinct => (Scaling::StemType1, exp, zero, zero, Some(Path::Ss)),
            Case::T1_5Proportional { a } => (
                Scaling::StemType1,
                Some(LimitLaw::Hypoexp { a }),
                zero,
                zero,
                Some(Path::Ss),
            ),
            Case::Null1 => (Scaling::NullStem, exp, zero, one, Some(Path::Sd)),
            Case::Null2 { a } => (
                Scaling::NullMixed,
                exp,
                Some(LimitLaw::BernoulliMix { a }),
                // xi + (alpha ^ 1)(1 - xi) with alpha = 1 on this boundary
                Some(LimitLaw::PointMass { x: a_min }),
                None,
            ),
            Case::Null3 => (Scaling::NullExponential, exp, uniform, one, Some(Path::Dd)),
            Case::Null4 { a } => (
                Scaling::NullLog,
                Some(LimitLaw::NullBoundaryTau { a }),
                Some(LimitLaw::NullBoundarySigma { a }),
                one,
                Some(Path::Dd),
            ),
            Case::Null5 | Case::Null7 => (Scaling::NullRayleigh, rayleigh, one, one, Some(Path::Dd)),
            Case::Null6 { .. } => (Scaling::None, None, one, one, Some(Path::Dd)),
            Case::BoundaryUnsupported => (Scaling::None, None, None, None, None),
        };
        Regime {
            case,
            alpha,
            scaling,
            tau_law,
            sigma_law,
            rho_law,
            path,
        }
    }

    /// Whether the regime has a limit law that a simulation can be checked
    /// against.
    pub fn is_verifiable(&self) -> bool {
        self.tau_law.is_some()
    }
}

fn alpha_of(v2: &RateExpr) -> Result<f64, AsymptoticsError> {
    let alpha = -v2.p;
    if !(alpha > 0.0) {
        return Err(AsymptoticsError::NonpositiveAlpha(alpha));
    }
    Ok(alpha)
}

fn check_order(lower: &RateExpr, upper: &RateExpr, names: (&'static str, &'static str)) -> Result<(), AsymptoticsError> {
    match compare_orders(lower, upper) {
        OrderRelation::MuchGreater => Err(AsymptoticsError::RateOrder {
            lower: names.0,
            upper: names.1,
        }),
        _ => Ok(()),
    }
}

/// Classifies general rate laws into the cases of the main theorem.
pub fn classify_theorem1(u1: &RateExpr, u2: &RateExpr, v1: &RateExpr, v2: &RateExpr) -> Result<Regime, AsymptoticsError> {
    use OrderRelation::*;
    check_order(u1, u2, ("u1", "u2"))?;
    check_order(v1, v2, ("v1", "v2"))?;
    let alpha = alpha_of(v2)?;
    let boundary = Regime::new(Case::BoundaryUnsupported, alpha);

    let product = v1.mul(*v2);
    let slow = RateExpr::power(-1.0, -2.0);
    let fast = RateExpr::power(-1.0, 0.0);
    // the daughter competitor u1 is compared with, or None past 1/N
    let competitor = match compare_orders(&product, &slow) {
        MuchLess => (product.scale(1.0, 1.0), Case::T1_1),
        SameOrder { .. } => return Ok(boundary),
        MuchGreater => match compare_orders(&product, &fast) {
            MuchLess => (product.scale(1.0, 0.0).sqrt(), Case::T1_2),
            SameOrder { .. } => return Ok(boundary),
            MuchGreater => return Ok(Regime::new(Case::T1_3, alpha)),
        },
    };
    match compare_orders(u1, &competitor.0) {
        MuchLess => return Ok(Regime::new(competitor.1, alpha)),
        SameOrder { .. } => return Ok(boundary),
        MuchGreater => {}
    }

    // the stem mutates first; decide between sd and ss
    let vs_log = compare_orders(u2, &RateExpr::power(0.0, -1.0));
    let vs_front = compare_orders(u2, &v2.scale(1.0, 0.0));
    let case = match (vs_log, vs_front) {
        (MuchLess, MuchLess) => Case::T1_4,
        (MuchGreater, _) | (_, MuchGreater) => match compare_orders(u1, u2) {
            MuchLess => Case::T1_5Distinct,
            SameOrder { ratio } => Case::T1_5Proportional { a: ratio },
            MuchGreater => unreachable!("rate order checked above"),
        },
        _ => Case::BoundaryUnsupported,
    };
    Ok(Regime::new(case, alpha))
}

/// Classifies the null model `u1 = u2 = v1 = v2 = mu`.
pub fn classify_null(mu: &RateExpr) -> Result<Regime, AsymptoticsError> {
    use OrderRelation::*;
    let alpha = alpha_of(mu)?;
    let thresholds = [
        RateExpr::power(-1.0, -1.0),
        RateExpr::power(-0.5, -1.0),
        RateExpr::power(-0.5, 0.0),
    ];
    let below = [Case::Null1, Case::Null3, Case::Null5];
    for (k, threshold) in thresholds.iter().enumerate() {
        match compare_orders(mu, threshold) {
            MuchLess => return Ok(Regime::new(below[k], alpha)),
            SameOrder { ratio: a } => {
                let case = match k {
                    0 => Case::Null2 { a },
                    1 => Case::Null4 { a },
                    _ => Case::Null6 { a },
                };
                return Ok(Regime::new(case, alpha));
            }
            MuchGreater => {}
        }
    }
    Ok(Regime::new(Case::Null7, alpha))
}

fn null_rate(config: &CryptConfig) -> Result<f64, AsymptoticsError> {
    let mu = config.u1;
    if config.u2 != mu || config.v1 != mu || config.v2 != mu {
        return Err(AsymptoticsError::MismatchedConfig(
            "null-model regimes need u1 = u2 = v1 = v2".into(),
        ));
    }
    Ok(mu)
}

/// Evaluates the regime's scaling recipe at the config's numeric rates.
pub fn scaling_factor(regime: &Regime, config: &CryptConfig) -> Result<f64, AsymptoticsError> {
    let n = (config.l as f64).exp2();
    let log_n = f64::from(config.l);
    let a_min = regime.alpha.min(1.0);
    let value = match regime.scaling {
        Scaling::DaughterExponential => a_min * config.v1 * config.v2 * n * log_n,
        Scaling::DaughterRayleigh => (config.v1 * config.v2 * n).sqrt(),
        Scaling::StemType1 => config.u1,
        Scaling::NullStem => null_rate(config)?,
        Scaling::NullMixed => {
            let a = regime.case.constant().unwrap_or(0.0);
            (1.0 + a) * null_rate(config)?
        }
        Scaling::NullExponential => {
            let mu = null_rate(config)?;
            a_min * mu * mu * n * log_n
        }
        Scaling::NullLog => {
            null_rate(config)?;
            1.0 / log_n
        }
        Scaling::NullRayleigh => n.sqrt() * null_rate(config)?,
        Scaling::None => return Err(AsymptoticsError::NoScaling(regime.case.tag().into())),
    };
    if !(value > 0.0 && value.is_finite()) {
        return Err(AsymptoticsError::MismatchedConfig(format!(
            "scaling {} evaluates to {value}",
            regime.scaling.formula()
        )));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: f64, p: f64, q: f64) -> RateExpr {
        RateExpr::new(c, p, q).unwrap()
    }

    #[test]
    fn theorem_examples() {
        let r = classify_theorem1(&p(1.0, -3.0, 0.0), &p(1.0, -3.0, 0.0), &p(1.0, -1.2, 0.0), &p(1.0, -0.5, 0.0)).unwrap();
        assert_eq!(r.case, Case::T1_1);
        assert_eq!(r.alpha, 0.5);
        assert_eq!(r.tau_law, Some(LimitLaw::Exp1));
        assert_eq!(r.sigma_law, Some(LimitLaw::UniformInterval { lo: 0.5, hi: 1.0 }));

        let r = classify_theorem1(&p(1.0, -3.0, 0.0), &p(1.0, -3.0, 0.0), &p(1.0, -0.4, 0.0), &p(1.0, -0.4, 0.0)).unwrap();
        assert_eq!(r.case, Case::T1_3);
        assert_eq!(r.scaling, Scaling::DaughterRayleigh);
        assert_eq!(r.tau_law, Some(LimitLaw::Rayleigh));

        let r = classify_theorem1(&p(1.0, -3.0, 0.0), &p(1.0, -3.0, 0.0), &p(1.0, -0.4, 0.0), &p(1.0, -0.5, 0.0));
        assert_eq!(r.unwrap_err(), AsymptoticsError::RateOrder { lower: "v1", upper: "v2" });
    }

    #[test]
    fn boundary_product() {
        let r = classify_theorem1(&p(1.0, -3.0, 0.0), &p(1.0, -3.0, 0.0), &p(1.0, -0.5, 0.0), &p(1.0, -0.5, 0.0)).unwrap();
        assert_eq!(r.case, Case::BoundaryUnsupported);
        assert!(!r.is_verifiable());
    }

    #[test]
    fn rayleigh_between_thresholds() {
        // v1 v2 = N^-1 log^-1
        let r = classify_theorem1(&p(1.0, -3.0, 0.0), &p(1.0, -3.0, 0.0), &p(1.0, -0.5, -1.0), &p(1.0, -0.5, 0.0)).unwrap();
        assert_eq!(r.case, Case::T1_2);
    }

    #[test]
    fn stem_regimes() {
        let sd = classify_theorem1(&p(1.0, -0.9, 0.0), &p(1.0, -0.9, 0.0), &p(1.0, -2.0, 0.0), &p(1.0, -0.5, 0.0)).unwrap();
        assert_eq!(sd.case, Case::T1_4);
        assert_eq!(sd.rho_law, Some(LimitLaw::PointMass { x: 0.5 }));
        assert_eq!(sd.sigma_law, Some(LimitLaw::PointMass { x: 0.0 }));
        assert_eq!(sd.path, Some(Path::Sd));

        let ss = classify_theorem1(&p(0.5, 0.0, 0.0), &p(0.5, 0.0, 0.0), &p(1.0, -2.0, 0.0), &p(1.0, -2.0, 0.0)).unwrap();
        assert_eq!(ss.case, Case::T1_5Proportional { a: 1.0 });
        assert_eq!(ss.tau_law, Some(LimitLaw::Hypoexp { a: 1.0 }));

        let distinct = classify_theorem1(&p(1.0, -0.2, 0.0), &p(0.5, 0.0, 0.0), &p(1.0, -2.0, 0.0), &p(1.0, -2.0, 0.0)).unwrap();
        assert_eq!(distinct.case, Case::T1_5Distinct);
        assert_eq!(distinct.path, Some(Path::Ss));
    }

    #[test]
    fn null_examples() {
        let r = classify_null(&p(2.0, -1.0, -1.0)).unwrap();
        assert_eq!(r.case, Case::Null2 { a: 2.0 });
        assert_eq!(r.scaling.formula(), "(1+A)*mu");
        assert_eq!(r.sigma_law, Some(LimitLaw::BernoulliMix { a: 2.0 }));

        let r = classify_null(&p(3.0, -0.5, -1.0)).unwrap();
        assert_eq!(r.case, Case::Null4 { a: 3.0 });
        assert_eq!(r.tau_law, Some(LimitLaw::NullBoundaryTau { a: 3.0 }));
        assert_eq!(r.sigma_law, Some(LimitLaw::NullBoundarySigma { a: 3.0 }));

        // N^-0.7 sits below 1/(sqrt(N) log N), so it is the exponential case
        let r = classify_null(&p(1.0, -0.7, 0.0)).unwrap();
        assert_eq!(r.case, Case::Null3);
        assert_eq!(r.sigma_law, Some(LimitLaw::UniformInterval { lo: 0.30000000000000004, hi: 1.0 }));

        let r = classify_null(&p(1.0, -0.5, -0.5)).unwrap();
        assert_eq!(r.case, Case::Null5);
        assert_eq!(r.tau_law, Some(LimitLaw::Rayleigh));

        assert_eq!(classify_null(&p(1.0, -2.0, 0.0)).unwrap().case, Case::Null1);
        assert_eq!(classify_null(&p(1.0, -0.8, 0.0)).unwrap().case, Case::Null3);
        assert_eq!(classify_null(&p(1.5, -0.5, 0.0)).unwrap().case, Case::Null6 { a: 1.5 });
        assert_eq!(classify_null(&p(1.0, -0.2, 0.0)).unwrap().case, Case::Null7);
        assert!(classify_null(&p(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn scaling_examples() {
        let t11 = Regime::new(Case::T1_1, 0.5);
        let c = CryptConfig::new(16, 1e-9, 1e-9, 1e-4, 2e-3);
        let s = scaling_factor(&t11, &c).unwrap();
        assert!((s - 0.5 * 1e-4 * 2e-3 * 65536.0 * 16.0).abs() < 1e-18);
        assert_eq!(scaling_factor(&Regime::new(Case::T1_4, 0.5), &c).unwrap(), 1e-9);

        let null = CryptConfig::null_model(16, 1e-5);
        assert_eq!(scaling_factor(&Regime::new(Case::Null4 { a: 3.0 }, 0.5), &null).unwrap(), 1.0 / 16.0);
        let s = scaling_factor(&Regime::new(Case::Null2 { a: 2.0 }, 1.0), &null).unwrap();
        assert!((s - 3e-5).abs() < 1e-20);
        assert!(scaling_factor(&Regime::new(Case::Null2 { a: 2.0 }, 1.0), &c).is_err());
        assert!(scaling_factor(&Regime::new(Case::BoundaryUnsupported, 1.0), &c).is_err());
    }

    fn lattice_rate() -> impl Strategy<Value = RateExpr> {
        (0.1f64..10.0, -16i32..=-1, -4i32..=4).prop_map(|(c, pp, q)| p(c, f64::from(pp) * 0.25, f64::from(q)))
    }

    proptest! {
        #[test]
        fn scale_consistent(u in lattice_rate(), v in lattice_rate(), du in 0i32..8, dv in 0i32..8, k in 0.01f64..100.0) {
            // order the pairs so the rate restriction holds
            let u2 = u.scale(f64::from(du) * 0.25, 0.0);
            let v2 = v.scale(f64::from(dv) * 0.25, 0.0);
            prop_assume!(v2.p < 0.0);
            let base = classify_theorem1(&u, &u2, &v, &v2).unwrap();
            let scaled = |r: RateExpr| RateExpr { c: r.c * k, ..r };
            let other = classify_theorem1(&scaled(u), &scaled(u2), &scaled(v), &scaled(v2)).unwrap();
            prop_assert_eq!(base.case.tag(), other.case.tag());
            if let (Some(a), Some(b)) = (base.case.constant(), other.case.constant()) {
                prop_assert!((a - b).abs() < 1e-12 * a);
            }
        }
    }

    #[test]
    fn null_model_never_reaches_stem_ss() {
        for pp in -40..=-1 {
            for q in -6..=6 {
                let mu = p(1.3, f64::from(pp) * 0.05, f64::from(q) * 0.5);
                let r = classify_theorem1(&mu, &mu, &mu, &mu).unwrap();
                assert!(
                    !matches!(r.case, Case::T1_5Distinct | Case::T1_5Proportional { .. }),
                    "p={pp} q={q}: {:?}",
                    r.case
                );
            }
        }
    }
}

/// Rate laws supplied alongside a numeric config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateLaws {
    General {
        u1: RateExpr,
        u2: RateExpr,
        v1: RateExpr,
        v2: RateExpr,
    },
    Null {
        mu: RateExpr,
    },
}

impl RateLaws {
    pub fn classify(&self) -> Result<Regime, AsymptoticsError> {
        match self {
            RateLaws::General { u1, u2, v1, v2 } => classify_theorem1(u1, u2, v1, v2),
            RateLaws::Null { mu } => classify_null(mu),
        }
    }

    /// Numeric rates `(u1, u2, v1, v2)` at `N = 2^l`.
    pub fn eval(&self, l: u32) -> [f64; 4] {
        match self {
            RateLaws::General { u1, u2, v1, v2 } => [u1.eval(l), u2.eval(l), v1.eval(l), v2.eval(l)],
            RateLaws::Null { mu } => [mu.eval(l); 4],
        }
    }
}
