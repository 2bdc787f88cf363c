use serde::{Deserialize, Serialize};

use super::ensemble::{run_ensemble, Engine, PathCounts};
use super::ks::{ks_one_sample, KsReport};
use crate::asymptotics::{scaling_factor, LimitLaw, RateLaws, Regime};
use crate::error::{AsymptoticsError, StatsError};
use crate::model::{CryptConfig, Path, RngStream, Variant};

/// Pass/fail thresholds for limit-law agreement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Largest KS distance accepted for scaled tau.
    pub tau_d_max: f64,
    /// Largest KS distance accepted for sigma or rho against a continuous law.
    pub sigma_d_max: f64,
    /// Half-width of the median window for point-mass limits.
    pub window: f64,
    /// Smallest accepted fraction of the predicted mutation path.
    pub path_min: f64,
    /// Largest accepted fraction of timed-out replicates.
    pub timeout_max: f64,
    /// Tolerance on the atom at zero of a Bernoulli mixture.
    pub atom_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            tau_d_max: 0.1,
            sigma_d_max: 0.1,
            window: 0.1,
            path_min: 0.9,
            timeout_max: 0.01,
            atom_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawCheck {
    #[serde(flatten)]
    pub ks: KsReport,
    pub pass: bool,
}

/// How sigma or rho was compared with its limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum LocationCheck {
    Ks {
        law: LimitLaw,
        #[serde(flatten)]
        check: LawCheck,
    },
    MedianWindow {
        target: f64,
        median: f64,
        /// Fraction of the sample within the window around the target.
        within_fraction: f64,
        pass: bool,
    },
    BernoulliMix {
        a: f64,
        zero_fraction: f64,
        expected_zero_fraction: f64,
        /// KS of the positive part against Uniform(0, 1].
        positive: Option<LawCheck>,
        pass: bool,
    },
}

impl LocationCheck {
    pub fn pass(&self) -> bool {
        match self {
            LocationCheck::Ks { check, .. } => check.pass,
            LocationCheck::MedianWindow { pass, .. } | LocationCheck::BernoulliMix { pass, .. } => *pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathFractions {
    pub ss: f64,
    pub sd: f64,
    pub dd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathCheck {
    pub expected: Path,
    pub fraction: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KsSection {
    pub tau: Option<LawCheck>,
}

/// Outcome of comparing one ensemble with its regime's limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub regime: Regime,
    pub alpha: f64,
    pub scaling_factor: Option<f64>,
    pub ks: KsSection,
    pub sigma_check: Option<LocationCheck>,
    pub rho_check: Option<LocationCheck>,
    pub path_fractions: Option<PathFractions>,
    pub path_check: Option<PathCheck>,
    pub timeout_fraction: Option<f64>,
    pub seed: u64,
    pub replicates: u64,
    pub variant: Variant,
    pub engine: Option<Engine>,
    pub thresholds: Thresholds,
    /// `None` when the regime has no limit law to verify against.
    pub verified: Option<bool>,
}

/// Per-replicate quantities that a verification looks at.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Samples {
    pub tau_scaled: Vec<f64>,
    pub sigma: Vec<f64>,
    pub rho: Vec<f64>,
    pub paths: PathCounts,
    pub timeouts: u64,
}

fn median(sample: &[f64]) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn law_check(sample: &[f64], law: &LimitLaw, d_max: f64) -> Result<LawCheck, StatsError> {
    let ks = ks_one_sample(sample, law)?;
    let pass = ks.statistic <= d_max;
    Ok(LawCheck { ks, pass })
}

fn location_check(sample: &[f64], law: &LimitLaw, t: &Thresholds) -> Result<LocationCheck, StatsError> {
    Ok(match *law {
        LimitLaw::PointMass { x } => {
            let median = median(sample);
            let within = sample.iter().filter(|&&s| (s - x).abs() <= t.window).count();
            LocationCheck::MedianWindow {
                target: x,
                median,
                within_fraction: within as f64 / sample.len() as f64,
                pass: (median - x).abs() <= t.window,
            }
        }
        LimitLaw::BernoulliMix { a } => {
            let positive: Vec<f64> = sample.iter().copied().filter(|&s| s > 0.0).collect();
            let zero_fraction = 1.0 - positive.len() as f64 / sample.len() as f64;
            let expected = 1.0 / (1.0 + a);
            let positive = if positive.is_empty() {
                None
            } else {
                Some(law_check(&positive, &LimitLaw::UniformInterval { lo: 0.0, hi: 1.0 }, t.sigma_d_max)?)
            };
            let pass = (zero_fraction - expected).abs() <= t.atom_tol && positive.as_ref().is_some_and(|c| c.pass);
            LocationCheck::BernoulliMix {
                a,
                zero_fraction,
                expected_zero_fraction: expected,
                positive,
                pass,
            }
        }
        ref other => LocationCheck::Ks {
            law: *other,
            check: law_check(sample, other, t.sigma_d_max)?,
        },
    })
}

fn classification_only(regime: Regime, variant: Variant, seed: u64, replicates: u64, t: Thresholds) -> VerificationReport {
    VerificationReport {
        regime,
        alpha: regime.alpha,
        scaling_factor: None,
        ks: KsSection::default(),
        sigma_check: None,
        rho_check: None,
        path_fractions: None,
        path_check: None,
        timeout_fraction: None,
        seed,
        replicates,
        variant,
        engine: None,
        thresholds: t,
        verified: None,
    }
}

/// Compares samples with the regime's limit laws. Unverifiable regimes give
/// a classification-only report.
pub fn evaluate(
    regime: &Regime,
    factor: f64,
    samples: &Samples,
    thresholds: &Thresholds,
    variant: Variant,
    seed: u64,
) -> Result<VerificationReport, StatsError> {
    let replicates = samples.paths.total() + samples.timeouts;
    let mut report = classification_only(*regime, variant, seed, replicates, *thresholds);
    let Some(tau_law) = regime.tau_law else {
        return Ok(report);
    };
    if replicates == 0 {
        return Err(StatsError::NoReplicates);
    }
    report.scaling_factor = Some(factor);
    let timeout_fraction = samples.timeouts as f64 / replicates as f64;
    report.timeout_fraction = Some(timeout_fraction);
    let mut pass = timeout_fraction <= thresholds.timeout_max;

    if !samples.tau_scaled.is_empty() {
        let tau = law_check(&samples.tau_scaled, &tau_law, thresholds.tau_d_max)?;
        pass &= tau.pass;
        report.ks.tau = Some(tau);
        if let Some(law) = regime.sigma_law {
            let c = location_check(&samples.sigma, &law, thresholds)?;
            pass &= c.pass();
            report.sigma_check = Some(c);
        }
        if let Some(law) = regime.rho_law {
            let c = location_check(&samples.rho, &law, thresholds)?;
            pass &= c.pass();
            report.rho_check = Some(c);
        }
        let completed = samples.paths.total() as f64;
        let fractions = PathFractions {
            ss: samples.paths.ss as f64 / completed,
            sd: samples.paths.sd as f64 / completed,
            dd: samples.paths.dd as f64 / completed,
        };
        report.path_fractions = Some(fractions);
        if let Some(expected) = regime.path {
            let fraction = samples.paths.get(expected) as f64 / completed;
            let ok = fraction >= thresholds.path_min;
            pass &= ok;
            report.path_check = Some(PathCheck {
                expected,
                fraction,
                pass: ok,
            });
        }
    } else {
        pass = false;
    }
    report.verified = Some(pass);
    Ok(report)
}

fn check_config_matches(config: &CryptConfig, laws: &RateLaws) -> Result<(), AsymptoticsError> {
    let expected = laws.eval(config.l);
    let actual = [config.u1, config.u2, config.v1, config.v2];
    for ((name, e), a) in ["u1", "u2", "v1", "v2"].iter().zip(expected).zip(actual) {
        if (e - a).abs() > 1e-9 * e.abs().max(a.abs()) {
            return Err(AsymptoticsError::MismatchedConfig(format!(
                "{name} = {a} but its rate law gives {e} at l = {}",
                config.l
            )));
        }
    }
    Ok(())
}

/// Classifies `laws`, runs the ensemble on `config` and compares the scaled
/// outcomes with the predicted limits.
///
/// The numeric rates in `config` must agree with `laws` evaluated at
/// `config.l` to a relative 1e-9.
pub fn verify_regime(
    config: &CryptConfig,
    laws: &RateLaws,
    variant: Variant,
    engine: Engine,
    replicates: u64,
    master_seed: u64,
    thresholds: &Thresholds,
) -> Result<VerificationReport, StatsError> {
    verify_regime_with_samples(config, laws, variant, engine, replicates, master_seed, thresholds).map(|(r, _)| r)
}

/// [`verify_regime`], also returning the samples that were tested. There are
/// no samples when the regime is not verifiable.
pub fn verify_regime_with_samples(
    config: &CryptConfig,
    laws: &RateLaws,
    variant: Variant,
    engine: Engine,
    replicates: u64,
    master_seed: u64,
    thresholds: &Thresholds,
) -> Result<(VerificationReport, Option<Samples>), StatsError> {
    let regime = laws.classify()?;
    if !regime.is_verifiable() {
        return Ok((classification_only(regime, variant, master_seed, replicates, *thresholds), None));
    }
    check_config_matches(config, laws)?;
    let factor = scaling_factor(&regime, config)?;
    let ensemble = run_ensemble(config, variant, engine, replicates, master_seed)?.scaled(factor);
    let samples = Samples {
        tau_scaled: ensemble.tau_scaled.unwrap_or_default(),
        sigma: ensemble.sigma,
        rho: ensemble.rho,
        paths: ensemble.path_counts,
        timeouts: ensemble.timeouts,
    };
    let mut report = evaluate(&regime, factor, &samples, thresholds, variant, master_seed)?;
    report.engine = Some(engine);
    Ok((report, Some(samples)))
}

/// Samples of size `n` drawn from the regime's own limit laws, with every
/// replicate on the predicted path.
pub fn synthetic_samples(regime: &Regime, n: usize, stream: &mut RngStream) -> Samples {
    let mut draw = |law: Option<LimitLaw>| -> Vec<f64> {
        match law {
            Some(law) => (0..n).map(|_| law.sample(stream)).collect(),
            None => Vec::new(),
        }
    };
    let tau_scaled = draw(regime.tau_law);
    let sigma = draw(regime.sigma_law);
    let rho = draw(regime.rho_law);
    let mut paths = PathCounts::default();
    match regime.path {
        Some(Path::Ss) | None => paths.ss = n as u64,
        Some(Path::Sd) => paths.sd = n as u64,
        Some(Path::Dd) => paths.dd = n as u64,
    }
    Samples {
        tau_scaled,
        sigma,
        rho,
        paths,
        timeouts: 0,
    }
}

/// Runs [`evaluate`] on synthetic limit-law samples; calibrates the harness
/// independently of the simulators.
pub fn self_test(regime: &Regime, n: usize, seed: u64, thresholds: &Thresholds) -> Result<VerificationReport, StatsError> {
    let mut stream = RngStream::from_seed(seed);
    let samples = synthetic_samples(regime, n, &mut stream);
    evaluate(regime, 1.0, &samples, thresholds, Variant::H1, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::RateExpr;

    fn law(c: f64, p: f64) -> RateExpr {
        RateExpr::new(c, p, 0.0).unwrap()
    }

    fn all_regimes() -> Vec<Regime> {
        let mut out = Vec::new();
        let generals = [
            (law(1.0, -3.0), law(1.0, -3.0), law(1.0, -1.2), law(1.0, -0.5)),
            (law(1.0, -3.0), law(1.0, -3.0), law(1.0, -0.4), law(1.0, -0.4)),
            (law(1.0, -0.9), law(1.0, -0.9), law(1.0, -2.0), law(1.0, -0.5)),
            (law(0.5, 0.0), law(0.5, 0.0), law(1.0, -2.0), law(1.0, -2.0)),
            (law(0.5, 0.0), law(0.25, 0.0), law(1.0, -2.0), law(1.0, -2.0)),
        ];
        for (u1, u2, v1, v2) in generals {
            out.push(RateLaws::General { u1, u2, v1, v2 }.classify().unwrap());
        }
        for (c, p, q) in [
            (1.0, -0.9, 0.0),
            (2.0, -1.0, -1.0),
            (1.0, -0.7, 0.0),
            (1.5, -0.5, -1.0),
            (1.0, -0.5, -0.5),
            (1.0, -0.3, 0.0),
        ] {
            let mu = RateExpr::new(c, p, q).unwrap();
            out.push(RateLaws::Null { mu }.classify().unwrap());
        }
        out
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn self_test_passes_for_every_regime() {
        let t = Thresholds::default();
        for regime in all_regimes() {
            let passes = (0..20)
                .filter(|&seed| self_test(&regime, 2000, seed, &t).unwrap().verified == Some(true))
                .count();
            assert!(passes >= 19, "{}: {passes}/20", regime.case);
        }
    }

    #[test]
    fn self_test_detects_wrong_scaling() {
        let regime = all_regimes()[0];
        let mut stream = RngStream::from_seed(1);
        let mut samples = synthetic_samples(&regime, 2000, &mut stream);
        for x in &mut samples.tau_scaled {
            *x *= 1.5;
        }
        let r = evaluate(&regime, 1.0, &samples, &Thresholds::default(), Variant::H1, 1).unwrap();
        assert_eq!(r.verified, Some(false));
        assert!(!r.ks.tau.unwrap().pass);
    }

    #[test]
    fn timeouts_fail_verification() {
        let regime = all_regimes()[1];
        let mut stream = RngStream::from_seed(2);
        let mut samples = synthetic_samples(&regime, 1000, &mut stream);
        samples.timeouts = 20;
        let r = evaluate(&regime, 1.0, &samples, &Thresholds::default(), Variant::H1, 2).unwrap();
        assert_eq!(r.verified, Some(false));
        assert!((r.timeout_fraction.unwrap() - 20.0 / 1020.0).abs() < 1e-15);
    }

    #[test]
    fn concentration_and_mixture_checks() {
        let t = Thresholds::default();
        let c = location_check(&[0.95, 1.0, 1.0, 0.5], &LimitLaw::PointMass { x: 1.0 }, &t).unwrap();
        assert!(c.pass());
        let c = location_check(&[0.5, 0.6, 0.95], &LimitLaw::PointMass { x: 1.0 }, &t).unwrap();
        assert!(!c.pass());
        // a third on the atom, the rest spread over (0, 1]
        let mut s = vec![0.0; 100];
        s.extend((1..=200).map(|i| f64::from(i) / 200.0));
        match location_check(&s, &LimitLaw::BernoulliMix { a: 2.0 }, &t).unwrap() {
            LocationCheck::BernoulliMix {
                zero_fraction, pass, ..
            } => {
                assert!((zero_fraction - 1.0 / 3.0).abs() < 1e-15);
                assert!(pass);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unverifiable_regime_reports_classification_only() {
        let mu = RateExpr::new(1.0, -0.5, 0.0).unwrap();
        let laws = RateLaws::Null { mu };
        let config = CryptConfig::null_model(6, mu.eval(6));
        let r = verify_regime(&config, &laws, Variant::H2, Engine::Fast, 10, 1, &Thresholds::default()).unwrap();
        assert_eq!(r.regime.case.tag(), "NULL.6");
        assert_eq!(r.verified, None);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["verified"].is_null());
    }

    #[test]
    fn config_must_match_laws() {
        let laws = RateLaws::General {
            u1: law(1.0, -3.0),
            u2: law(1.0, -3.0),
            v1: law(1.0, -0.4),
            v2: law(1.0, -0.4),
        };
        let r = laws.eval(8);
        let good = CryptConfig::new(8, r[0], r[1], r[2], r[3]);
        assert!(check_config_matches(&good, &laws).is_ok());
        let bad = CryptConfig::new(8, r[0], r[1], 2.0 * r[2], r[3]);
        assert!(check_config_matches(&bad, &laws).is_err());
    }

    #[test]
    fn small_rayleigh_ensemble_reports_every_section() {
        let laws = RateLaws::General {
            u1: law(1.0, -3.0),
            u2: law(1.0, -3.0),
            v1: law(1.0, -0.4),
            v2: law(1.0, -0.4),
        };
        let r = laws.eval(10);
        let config = CryptConfig::new(10, r[0], r[1], r[2], r[3]);
        let report = verify_regime(&config, &laws, Variant::H2, Engine::Fast, 500, 3, &Thresholds::default()).unwrap();
        assert_eq!(report.regime.case.tag(), "T1.3");
        assert!(report.ks.tau.is_some());
        assert!(matches!(report.sigma_check, Some(LocationCheck::MedianWindow { target, .. }) if target == 1.0));
        assert!(report.verified.is_some());
        let json = serde_json::to_value(&report).unwrap();
        for key in [
            "regime",
            "alpha",
            "scaling_factor",
            "ks",
            "sigma_check",
            "rho_check",
            "path_fractions",
            "timeout_fraction",
            "seed",
            "replicates",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!(json["ks"]["tau"]["D"].is_number());
        assert!(json["ks"]["tau"]["p"].is_number());
        assert!(json["ks"]["tau"]["pass"].is_boolean());
    }
}
