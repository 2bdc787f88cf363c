//! Flat TOML configuration files.

use std::path::Path;

use crypt_regimes::asymptotics::{RateExpr, RateLaws};
use crypt_regimes::model::DEFAULT_MAX_TIME;
use crypt_regimes::stats::Engine;
use crypt_regimes::{CryptConfig, Variant};
use serde::{Deserialize, Serialize};

use crate::error::UsageError;

pub const DEFAULT_REPLICATES: u64 = 1000;
pub const DEFAULT_SEED: u64 = 0;

/// The on-disk key set. `max_time = inf` means no cutoff.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u1_law: Option<RateExpr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u2_law: Option<RateExpr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1_law: Option<RateExpr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v2_law: Option<RateExpr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_law: Option<RateExpr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
}

impl FileConfig {
    pub fn read(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError::MissingConfig {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, UsageError> {
        toml::from_str(text).map_err(|e| UsageError::Config(e.message().to_string()))
    }
}

/// A config with every default and command-line override applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub l: Option<u32>,
    pub rates: Option<[f64; 4]>,
    /// `None` for an unbounded run.
    pub max_time: Option<f64>,
    pub laws: Option<RateLaws>,
    pub replicates: u64,
    pub seed: u64,
    pub engine: Engine,
    pub variant: Variant,
}

fn laws_of(file: &FileConfig) -> Result<Option<RateLaws>, UsageError> {
    let general = [file.u1_law, file.u2_law, file.v1_law, file.v2_law];
    match (general, file.mu_law) {
        ([None, None, None, None], None) => Ok(None),
        ([None, None, None, None], Some(mu)) => Ok(Some(RateLaws::Null { mu })),
        ([Some(u1), Some(u2), Some(v1), Some(v2)], None) => Ok(Some(RateLaws::General { u1, u2, v1, v2 })),
        (_, Some(_)) => Err(UsageError::Config("mu_law cannot be combined with u1_law..v2_law".into())),
        _ => Err(UsageError::Config(
            "rate laws need all of u1_law, u2_law, v1_law and v2_law".into(),
        )),
    }
}

fn rates_of(file: &FileConfig) -> Result<Option<[f64; 4]>, UsageError> {
    match (file.u1, file.u2, file.v1, file.v2) {
        (None, None, None, None) => Ok(None),
        (Some(u1), Some(u2), Some(v1), Some(v2)) => Ok(Some([u1, u2, v1, v2])),
        _ => Err(UsageError::Config("numeric rates need all of u1, u2, v1 and v2".into())),
    }
}

impl Settings {
    pub fn from_file(file: &FileConfig) -> Result<Self, UsageError> {
        let max_time = match file.max_time {
            None => Some(DEFAULT_MAX_TIME),
            Some(t) if t == f64::INFINITY => None,
            Some(t) if t > 0.0 => Some(t),
            Some(t) => return Err(UsageError::Config(format!("max_time must be positive, got {t}"))),
        };
        Ok(Settings {
            l: file.l,
            rates: rates_of(file)?,
            max_time,
            laws: laws_of(file)?,
            replicates: file.replicates.unwrap_or(DEFAULT_REPLICATES),
            seed: file.seed.unwrap_or(DEFAULT_SEED),
            engine: file.engine.unwrap_or(Engine::Fast),
            variant: file.variant.unwrap_or(Variant::H2),
        })
    }

    /// The numeric crypt, required by every command that simulates.
    pub fn crypt(&self) -> Result<CryptConfig, UsageError> {
        let l = self.l.ok_or_else(|| UsageError::Config("config is missing `l`".into()))?;
        let [u1, u2, v1, v2] = self
            .rates
            .ok_or_else(|| UsageError::Config("config is missing the numeric rates u1, u2, v1, v2".into()))?;
        Ok(CryptConfig::new(l, u1, u2, v1, v2).with_max_time(self.max_time))
    }

    pub fn require_laws(&self) -> Result<RateLaws, UsageError> {
        self.laws
            .ok_or_else(|| UsageError::Config("config has no rate laws (u1_law..v2_law or mu_law)".into()))
    }

    /// A file that parses back to these settings.
    pub fn to_file(&self) -> FileConfig {
        let mut file = FileConfig {
            l: self.l,
            max_time: Some(self.max_time.unwrap_or(f64::INFINITY)),
            replicates: Some(self.replicates),
            seed: Some(self.seed),
            engine: Some(self.engine),
            variant: Some(self.variant),
            ..FileConfig::default()
        };
        if let Some([u1, u2, v1, v2]) = self.rates {
            (file.u1, file.u2, file.v1, file.v2) = (Some(u1), Some(u2), Some(v1), Some(v2));
        }
        match self.laws {
            Some(RateLaws::General { u1, u2, v1, v2 }) => {
                (file.u1_law, file.u2_law, file.v1_law, file.v2_law) = (Some(u1), Some(u2), Some(v1), Some(v2));
            }
            Some(RateLaws::Null { mu }) => file.mu_law = Some(mu),
            None => {}
        }
        file
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("config fields are all TOML-representable")
    }
}
