use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Largest supported number of daughter generations. `2^l` must stay exact in
/// both `u64` and `f64`.
pub const MAX_L: u32 = 52;

/// Cutoff applied by the engines when a config leaves `max_time` unset.
pub const DEFAULT_MAX_TIME: f64 = 1.0e6;

/// Model variant simulated by an engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Rejection model: type-1 marks on non-type-0 cells and type-2 marks on
    /// non-type-1 cells are discarded.
    H1,
    /// Counter model: each daughter type-1 mark unlocks a fresh type-2 process.
    H2,
    /// Daughter-only mutations.
    M1,
    /// Stem type-1 plus daughter type-2 only.
    M2,
    /// Stem-only mutations.
    M3,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::H1, Variant::H2, Variant::M1, Variant::M2, Variant::M3];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::H1 => "h1",
            Variant::H2 => "h2",
            Variant::M1 => "m1",
            Variant::M2 => "m2",
            Variant::M3 => "m3",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "h1" => Ok(Variant::H1),
            "h2" => Ok(Variant::H2),
            "m1" => Ok(Variant::M1),
            "m2" => Ok(Variant::M2),
            "m3" => Ok(Variant::M3),
            other => Err(format!("unknown variant `{other}` (expected h1|h2|m1|m2|m3)")),
        }
    }
}

/// Mutation intensities actually driving a simulation once the variant has
/// switched off the processes it excludes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub u1: f64,
    pub u2: f64,
    pub v1: f64,
    pub v2: f64,
}

/// Concrete parameters of one crypt simulation.
///
/// The population size `N = 2^l` is always derived from `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CryptConfig {
    /// Number of daughter generations.
    pub l: u32,
    /// Stem type-1 intensity.
    pub u1: f64,
    /// Stem type-2 intensity.
    pub u2: f64,
    /// Daughter type-1 intensity (per cell).
    pub v1: f64,
    /// Daughter type-2 intensity (per cell).
    pub v2: f64,
    /// Simulation cutoff in model time; `None` means unbounded.
    pub max_time: Option<f64>,
    /// Enforce `u1 <= u2` and `v1 <= v2` on the rates a variant uses.
    #[serde(default = "default_true")]
    pub enforce_rate_order: bool,
}

fn default_true() -> bool {
    true
}

impl CryptConfig {
    pub fn new(l: u32, u1: f64, u2: f64, v1: f64, v2: f64) -> Self {
        CryptConfig {
            l,
            u1,
            u2,
            v1,
            v2,
            max_time: Some(DEFAULT_MAX_TIME),
            enforce_rate_order: true,
        }
    }

    /// Same rate for every process.
    pub fn null_model(l: u32, mu: f64) -> Self {
        Self::new(l, mu, mu, mu, mu)
    }

    pub fn with_max_time(mut self, max_time: Option<f64>) -> Self {
        self.max_time = max_time;
        self
    }

    /// Population size `N = 2^l`.
    pub fn population(&self) -> u64 {
        1u64 << self.l
    }

    /// Number of daughter cells, `N - 1`.
    pub fn daughters(&self) -> u64 {
        self.population() - 1
    }

    /// Cutoff as a number; `+inf` when unbounded.
    pub fn horizon(&self) -> f64 {
        self.max_time.unwrap_or(f64::INFINITY)
    }

    /// Rates with the processes excluded by `variant` set to zero.
    pub fn rates_for(&self, variant: Variant) -> Rates {
        let CryptConfig { u1, u2, v1, v2, .. } = *self;
        match variant {
            Variant::H1 | Variant::H2 => Rates { u1, u2, v1, v2 },
            Variant::M1 => Rates { u1: 0.0, u2: 0.0, v1, v2 },
            Variant::M2 => Rates { u1, u2: 0.0, v1: 0.0, v2 },
            Variant::M3 => Rates { u1, u2, v1: 0.0, v2: 0.0 },
        }
    }
}

/// Checks the config invariants for `variant` and returns it unchanged.
///
/// Rates a variant switches off are exempt from the ordering check, as are
/// rates that are exactly zero.
pub fn validate_config(config: &CryptConfig, variant: Variant) -> Result<CryptConfig, ConfigError> {
    if config.l == 0 {
        return Err(ConfigError::NonpositiveL(0));
    }
    if config.l > MAX_L {
        return Err(ConfigError::LTooLarge(config.l));
    }
    for (name, value) in [("u1", config.u1), ("u2", config.u2), ("v1", config.v1), ("v2", config.v2)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(ConfigError::NegativeRate { name, value });
        }
    }
    if let Some(t) = config.max_time {
        if !(t > 0.0) {
            return Err(ConfigError::NonpositiveMaxTime(t));
        }
    }
    if config.enforce_rate_order {
        let r = config.rates_for(variant);
        for (lower, lo, upper, hi) in [("u1", r.u1, "u2", r.u2), ("v1", r.v1, "v2", r.v2)] {
            if lo > 0.0 && hi > 0.0 && lo > hi {
                return Err(ConfigError::OrderingViolation {
                    lower,
                    lower_value: lo,
                    upper,
                    upper_value: hi,
                });
            }
        }
    }
    Ok(*config)
}
