use std::fmt;

use serde::{Deserialize, Serialize};

/// Depth of a mutation in the crypt, kept as the generation integer so that
/// comparisons are exact. Generation 0 is the stem cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub generation: u32,
    pub l: u32,
}

impl Location {
    pub fn new(generation: u32, l: u32) -> Self {
        debug_assert!(generation <= l);
        Location { generation, l }
    }

    pub fn stem(l: u32) -> Self {
        Location { generation: 0, l }
    }

    /// The fraction `generation / l`.
    pub fn fraction(&self) -> f64 {
        self.generation as f64 / self.l as f64
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.generation, self.l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Type2Occurred,
    TimedOut,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Type2Occurred => "type2-occurred",
            Status::TimedOut => "timed-out",
        }
    }
}

/// Where the two cancer-causing mutations landed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Path {
    /// Both on the stem cell.
    Ss,
    /// Type-1 on the stem, type-2 on a daughter.
    Sd,
    /// Both on daughters.
    Dd,
}

impl Path {
    pub fn as_str(self) -> &'static str {
        match self {
            Path::Ss => "ss",
            Path::Sd => "sd",
            Path::Dd => "dd",
        }
    }
}

/// Result of one replicate.
///
/// Timed-out outcomes carry `tau = max_time` and no locations or path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub status: Status,
    pub tau: f64,
    pub sigma: Option<Location>,
    pub rho: Option<Location>,
    pub path: Option<Path>,
    pub stem_type1_time: Option<f64>,
    pub cancer_type1_time: Option<f64>,
}

impl SimOutcome {
    pub fn timed_out(max_time: f64, stem_type1_time: Option<f64>) -> Self {
        SimOutcome {
            status: Status::TimedOut,
            tau: max_time,
            sigma: None,
            rho: None,
            path: None,
            stem_type1_time: stem_type1_time.filter(|&t| t <= max_time),
            cancer_type1_time: None,
        }
    }

    pub fn occurred(&self) -> bool {
        self.status == Status::Type2Occurred
    }

    /// Checks the structural invariants every engine must respect.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.status == Status::TimedOut {
            if self.sigma.is_some() || self.rho.is_some() || self.path.is_some() {
                return Err("timed-out outcome carries locations".into());
            }
            return Ok(());
        }
        let (sigma, rho, path) = match (self.sigma, self.rho, self.path) {
            (Some(s), Some(r), Some(p)) => (s, r, p),
            _ => return Err("completed outcome is missing sigma, rho or path".into()),
        };
        if sigma.generation > sigma.l || rho.generation > rho.l || sigma.l != rho.l {
            return Err(format!("locations out of range: sigma={sigma} rho={rho}"));
        }
        match path {
            Path::Ss if sigma.generation != 0 || rho.generation != 0 => {
                return Err(format!("ss path with sigma={sigma} rho={rho}"));
            }
            Path::Sd if sigma.generation != 0 || rho.generation == 0 => {
                return Err(format!("sd path with sigma={sigma} rho={rho}"));
            }
            Path::Dd if sigma.generation == 0 || sigma.generation > rho.generation => {
                return Err(format!("dd path with sigma={sigma} rho={rho}"));
            }
            _ => {}
        }
        let x1 = self
            .cancer_type1_time
            .ok_or_else(|| "completed outcome without cancer-causing type-1 time".to_string())?;
        if !(x1 <= self.tau) {
            return Err(format!("cancer type-1 time {x1} after tau {}", self.tau));
        }
        if path != Path::Dd && self.stem_type1_time != Some(x1) {
            return Err("stem-initiated path whose stem type-1 time differs from X1".into());
        }
        Ok(())
    }
}
