//! Simulation and asymptotic analysis of two-hit mutation times in a
//! hierarchically dividing colonic crypt.

pub mod asymptotics;
pub mod engine;
pub mod error;
pub mod model;
pub mod oracle;
pub mod stats;

pub use error::{AsymptoticsError, ConfigError, SimError, StatsError, StructureError};
pub use model::{CryptConfig, Location, Path, Rates, RngStream, SimOutcome, Status, Variant};
