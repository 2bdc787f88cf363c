use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{simulate_coupled, simulate_fast};
use crate::error::{SimError, StatsError};
use crate::model::{derive_replicate_stream, CryptConfig, Path, SimOutcome, Variant};
use crate::oracle::simulate_exact;

/// Which simulator drives an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Exact,
    Fast,
    Coupled,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Fast => "fast",
            Engine::Coupled => "coupled",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Engine::Exact),
            "fast" => Ok(Engine::Fast),
            "coupled" => Ok(Engine::Coupled),
            other => Err(format!("unknown engine '{other}' (expected exact, fast or coupled)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathCounts {
    pub ss: u64,
    pub sd: u64,
    pub dd: u64,
}

impl PathCounts {
    pub fn total(&self) -> u64 {
        self.ss + self.sd + self.dd
    }

    pub fn get(&self, path: Path) -> u64 {
        match path {
            Path::Ss => self.ss,
            Path::Sd => self.sd,
            Path::Dd => self.dd,
        }
    }

    fn add(&mut self, path: Path) {
        match path {
            Path::Ss => self.ss += 1,
            Path::Sd => self.sd += 1,
            Path::Dd => self.dd += 1,
        }
    }
}

/// Outcomes of one ensemble, stored by replicate index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub config: CryptConfig,
    pub variant: Variant,
    pub engine: Engine,
    pub replicates: u64,
    pub master_seed: u64,
    /// Every replicate's outcome, timed out or not.
    pub outcomes: Vec<SimOutcome>,
    /// tau, sigma and rho of the replicates that did not time out.
    pub tau: Vec<f64>,
    pub sigma: Vec<f64>,
    pub rho: Vec<f64>,
    pub scaling_factor: Option<f64>,
    pub tau_scaled: Option<Vec<f64>>,
    pub path_counts: PathCounts,
    pub timeouts: u64,
    /// Coupled engine only: replicates where the counter model's tau is not
    /// the minimum of the sub-models' taus.
    pub decomposition_failures: Option<u64>,
}

impl EnsembleResult {
    pub fn all_timed_out(&self) -> bool {
        self.timeouts == self.replicates
    }

    pub fn timeout_fraction(&self) -> f64 {
        self.timeouts as f64 / self.replicates as f64
    }

    /// Attaches `tau_scaled = factor * tau`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.tau_scaled = Some(self.tau.iter().map(|t| factor * t).collect());
        self.scaling_factor = Some(factor);
        self
    }

    /// Scaled tau of replicate `index`, if it did not time out.
    pub fn scaled_tau_of(&self, index: usize) -> Option<f64> {
        let o = &self.outcomes[index];
        match (o.occurred(), self.scaling_factor) {
            (true, Some(f)) => Some(f * o.tau),
            _ => None,
        }
    }
}

fn run_one(
    config: &CryptConfig,
    variant: Variant,
    engine: Engine,
    seed: u64,
    index: u64,
) -> Result<(SimOutcome, bool), SimError> {
    let stream = derive_replicate_stream(seed, index);
    match engine {
        Engine::Exact => simulate_exact(config, variant, &stream).map(|o| (o, true)),
        Engine::Fast => simulate_fast(config, variant, &stream).map(|o| (o, true)),
        Engine::Coupled => {
            let c = simulate_coupled(config, &stream)?;
            let o = match variant {
                Variant::H2 => c.h2,
                Variant::M1 => c.m1,
                Variant::M2 => c.m2,
                Variant::M3 => c.m3,
                Variant::H1 => return Err(SimError::UnsupportedVariant(variant)),
            };
            Ok((o, c.decomposition_holds()))
        }
    }
}

/// Runs `replicates` independent replicates; replicate `r` uses
/// `derive_replicate_stream(master_seed, r)`. Replicates run on the current
/// rayon pool and the result does not depend on its size.
pub fn run_ensemble(
    config: &CryptConfig,
    variant: Variant,
    engine: Engine,
    replicates: u64,
    master_seed: u64,
) -> Result<EnsembleResult, StatsError> {
    if replicates == 0 {
        return Err(StatsError::NoReplicates);
    }
    if variant == Variant::H1 && engine != Engine::Exact {
        return Err(StatsError::UnsupportedEngine {
            engine: engine.as_str(),
            variant,
        });
    }
    let runs: Vec<(SimOutcome, bool)> = (0..replicates)
        .into_par_iter()
        .map(|r| run_one(config, variant, engine, master_seed, r))
        .collect::<Result<_, _>>()?;

    let mut result = EnsembleResult {
        config: *config,
        variant,
        engine,
        replicates,
        master_seed,
        outcomes: Vec::with_capacity(runs.len()),
        tau: Vec::new(),
        sigma: Vec::new(),
        rho: Vec::new(),
        scaling_factor: None,
        tau_scaled: None,
        path_counts: PathCounts::default(),
        timeouts: 0,
        decomposition_failures: (engine == Engine::Coupled).then_some(0),
    };
    for (outcome, identity) in runs {
        if !identity {
            if let Some(f) = result.decomposition_failures.as_mut() {
                *f += 1;
            }
        }
        match (outcome.sigma, outcome.rho, outcome.path) {
            (Some(sigma), Some(rho), Some(path)) if outcome.occurred() => {
                result.tau.push(outcome.tau);
                result.sigma.push(sigma.fraction());
                result.rho.push(rho.fraction());
                result.path_counts.add(path);
            }
            _ => result.timeouts += 1,
        }
        result.outcomes.push(outcome);
    }
    Ok(result)
}
