//! Ensembles of replicates, Kolmogorov–Smirnov tests and regime verification.

mod ensemble;
mod ks;
mod verify;

pub use ensemble::{run_ensemble, Engine, EnsembleResult, PathCounts};
pub use ks::{empirical_cdf, ks_one_sample, ks_one_sample_with, ks_two_sample, KsReport, KS_LEVEL};
pub use verify::{
    evaluate, self_test, synthetic_samples, verify_regime, verify_regime_with_samples, KsSection, LawCheck, LocationCheck, PathCheck,
    PathFractions, Samples, Thresholds, VerificationReport,
};
