use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use crypt_regimes::stats::Engine;
use crypt_regimes::Variant;

use crate::config::{FileConfig, Settings};
use crate::error::UsageError;

#[derive(Debug, Parser)]
#[command(name = "crypt-regimes", version, about = "Simulate and classify two-hit mutation times in a colonic crypt")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Run an ensemble and write one CSV row per replicate.
    Simulate(CommonArgs),
    /// Classify the config's rate laws and print the regime as JSON.
    Classify(CommonArgs),
    /// Compare a scaled ensemble with the regime's limit laws.
    Verify(CommonArgs),
    /// Two-sample KS test of the exact simulator against the fast engine.
    OracleCheck(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Exact,
    Fast,
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    H1,
    H2,
    M1,
    M2,
    M3,
}

#[derive(Debug, clap::Args)]
struct CommonArgs {
    /// TOML config file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, value_name = "R")]
    replicates: Option<u64>,
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// ECDF table written by `verify`; defaults to the output path with an
    /// `.ecdf.csv` suffix.
    #[arg(long, value_name = "PATH")]
    ecdf: Option<PathBuf>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, value_name = "T")]
    threads: Option<usize>,
    /// Simulation cutoff; `inf` for none.
    #[arg(long, value_name = "X")]
    max_time: Option<f64>,
    /// Add the integer generations of sigma and rho to the CSV.
    #[arg(long)]
    wide: bool,
    /// Print the fully resolved config and exit.
    #[arg(long)]
    emit_config: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Classify,
    Verify,
    OracleCheck,
}

/// A parsed command line with the config file read and overrides applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config_path: PathBuf,
    pub settings: Settings,
    pub out: Option<PathBuf>,
    pub ecdf: Option<PathBuf>,
    pub threads: Option<usize>,
    pub wide: bool,
    pub emit_config: bool,
}

/// Outcome of argument parsing: either something to run or text that clap
/// wants printed (help, version).
#[derive(Debug)]
pub enum Parsed {
    Run(Box<Invocation>),
    Display(String),
}

/// Parses `argv` without the program name.
pub fn parse_invocation<I, S>(argv: I) -> Result<Parsed, UsageError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("crypt-regimes")).chain(argv.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    Ok(Parsed::Display(e.render().to_string()))
                }
                _ => Err(UsageError::Arguments(e.render().to_string().trim_end().to_string())),
            };
        }
    };
    let (command, args) = match cli.command {
        CommandArgs::Simulate(a) => (Command::Simulate, a),
        CommandArgs::Classify(a) => (Command::Classify, a),
        CommandArgs::Verify(a) => (Command::Verify, a),
        CommandArgs::OracleCheck(a) => (Command::OracleCheck, a),
    };
    let file = FileConfig::read(&args.config)?;
    let mut settings = Settings::from_file(&file)?;
    if let Some(r) = args.replicates {
        settings.replicates = r;
    }
    if let Some(s) = args.seed {
        settings.seed = s;
    }
    if let Some(e) = args.engine {
        settings.engine = match e {
            EngineArg::Exact => Engine::Exact,
            EngineArg::Fast => Engine::Fast,
            EngineArg::Coupled => Engine::Coupled,
        };
    }
    if let Some(v) = args.variant {
        settings.variant = match v {
            VariantArg::H1 => Variant::H1,
            VariantArg::H2 => Variant::H2,
            VariantArg::M1 => Variant::M1,
            VariantArg::M2 => Variant::M2,
            VariantArg::M3 => Variant::M3,
        };
    }
    if let Some(t) = args.max_time {
        settings.max_time = match t {
            t if t == f64::INFINITY => None,
            t if t > 0.0 => Some(t),
            t => return Err(UsageError::Arguments(format!("--max-time must be positive, got {t}"))),
        };
    }
    if settings.replicates == 0 {
        return Err(UsageError::Arguments("--replicates must be at least 1".into()));
    }
    if args.threads == Some(0) {
        return Err(UsageError::Arguments("--threads must be at least 1".into()));
    }
    Ok(Parsed::Run(Box::new(Invocation {
        command,
        config_path: args.config,
        settings,
        out: args.out,
        ecdf: args.ecdf,
        threads: args.threads,
        wide: args.wide,
        emit_config: args.emit_config,
    })))
}
