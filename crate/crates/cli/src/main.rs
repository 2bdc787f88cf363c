use std::process::ExitCode;

use crypt_regimes::{AsymptoticsError, ConfigError, SimError, StatsError};
use crypt_regimes_cli::{diagnostic, parse_invocation, run_command, Finish, Parsed, UsageError};

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(u) = e.downcast_ref::<UsageError>() {
        u.kind()
    } else if e.downcast_ref::<ConfigError>().is_some() || e.downcast_ref::<AsymptoticsError>().is_some() {
        "config"
    } else if e.downcast_ref::<SimError>().is_some() || e.downcast_ref::<StatsError>().is_some() {
        "simulation"
    } else {
        "io"
    }
}

fn main() -> ExitCode {
    let inv = match parse_invocation(std::env::args_os().skip(1)) {
        Ok(Parsed::Run(inv)) => inv,
        Ok(Parsed::Display(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            diagnostic("error", e.kind(), &e.to_string());
            return ExitCode::from(2);
        }
    };
    match run_command(&inv) {
        Ok(Finish::Ok) => ExitCode::SUCCESS,
        Ok(Finish::CheckFailed) => {
            diagnostic("error", "check-failed", "verification did not pass");
            ExitCode::from(1)
        }
        Err(e) => {
            diagnostic("error", error_kind(&e), &format!("{e:#}"));
            ExitCode::from(2)
        }
    }
}
