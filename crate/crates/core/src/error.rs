use thiserror::Error;

/// Rejections raised while validating a [`CryptConfig`](crate::CryptConfig).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("l must be at least 1 (got {0})")]
    NonpositiveL(i64),
    #[error("l = {0} exceeds the supported maximum of {max}", max = crate::model::MAX_L)]
    LTooLarge(u32),
    #[error("rate {name} must be finite and nonnegative (got {value})")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("rate ordering violated: {lower} = {lower_value} > {upper} = {upper_value}")]
    OrderingViolation {
        lower: &'static str,
        lower_value: f64,
        upper: &'static str,
        upper_value: f64,
    },
    #[error("max_time must be positive (got {0})")]
    NonpositiveMaxTime(f64),
}

/// Errors from the structural formulas of the crypt.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureError {
    #[error("generation {k} out of range 1..={l}")]
    GenerationOutOfRange { l: u32, k: u32 },
    #[error("argument {name} out of range: {value}")]
    ArgumentOutOfRange { name: &'static str, value: f64 },
}

/// Errors from either simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("l = {l} exceeds the exact oracle limit of {limit}")]
    ResourceLimit { l: u32, limit: u32 },
    #[error("variant {0} is not supported by this engine")]
    UnsupportedVariant(crate::Variant),
    #[error("stopping rule can only be disabled with a finite max_time")]
    UnboundedExhaustiveRun,
}

/// Errors from regime classification and scaling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error("rate law coefficient must be finite and positive (got {0})")]
    InvalidCoefficient(f64),
    #[error("rate law exponents must be finite (got p = {p}, q = {q})")]
    InvalidExponent { p: f64, q: f64 },
    #[error("rate ordering violated: {lower} is of larger order than {upper}")]
    RateOrder { lower: &'static str, upper: &'static str },
    #[error("alpha = {0} must be positive")]
    NonpositiveAlpha(f64),
    #[error("regime {0} has no scaling factor")]
    NoScaling(String),
    #[error("config does not match the regime: {0}")]
    MismatchedConfig(String),
}

/// Errors from the ensemble runner and the statistical checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("replicate count must be positive")]
    NoReplicates,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error("the {engine} engine cannot run variant {variant}")]
    UnsupportedEngine { engine: &'static str, variant: crate::Variant },
}
