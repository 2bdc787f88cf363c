//! Command-line front end: config parsing, dispatch and output writers.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

use serde_json::json;

pub use args::{parse_invocation, Command, Invocation, Parsed};
pub use commands::{run_command, Finish};
pub use error::UsageError;

/// One JSON diagnostic line on standard error.
pub fn diagnostic(level: &str, kind: &str, message: &str) {
    eprintln!("{}", json!({ "level": level, "kind": kind, "message": message }));
}
