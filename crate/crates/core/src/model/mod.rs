//! Domain types shared by both simulation engines: model parameters,
//! per-replicate outcomes, deterministic random streams and the structural
//! formulas of the binary crypt.

mod config;
mod outcome;
mod rng;
mod structure;

pub use config::{validate_config, CryptConfig, Rates, Variant, DEFAULT_MAX_TIME, MAX_L};
pub use outcome::{Location, Path, SimOutcome, Status};
pub use rng::{derive_replicate_stream, RngStream};
pub use structure::{generation_of_daughter, generation_size, total_descendants};
