use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use crypt_regimes::asymptotics::{scaling_factor, LimitLaw, Regime};
use crypt_regimes::stats::{
    empirical_cdf, ks_two_sample, run_ensemble, verify_regime_with_samples, Engine, EnsembleResult, Samples,
    Thresholds,
};
use serde_json::{json, Value};

use crate::args::{Command, Invocation};
use crate::error::UsageError;

/// Version of the metadata sidecar written next to output files.
pub const METADATA_VERSION: u32 = 1;

pub const OUTCOME_HEADER: [&str; 8] = [
    "replicate",
    "tau",
    "tau_scaled",
    "sigma",
    "rho",
    "path",
    "stem_type1_time",
    "status",
];

/// How a successful command finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Finish {
    Ok,
    CheckFailed,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &Value) -> Result<()> {
    let mut out = open_out(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Run metadata kept out of the data files so that those stay
/// byte-identical across thread counts.
fn write_metadata(inv: &Invocation, out: &Path) -> Result<()> {
    let meta = json!({
        "metadata_version": METADATA_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": format!("{:?}", inv.command),
        "config_path": inv.config_path.display().to_string(),
        "threads": inv.threads,
        "config": inv.settings.to_toml(),
    });
    write_json(Some(&sidecar(out, ".meta.json")), &meta)
}

/// Compact regime description shared by `classify` and `verify`.
pub fn regime_json(regime: &Regime) -> Value {
    json!({
        "case": regime.case.tag(),
        "A": regime.case.constant(),
        "alpha": regime.alpha,
        "scaling": regime.scaling.formula(),
        "tau_law": regime.tau_law,
        "sigma_law": regime.sigma_law,
        "rho_law": regime.rho_law,
        "path": regime.path,
        "verifiable": regime.is_verifiable(),
    })
}

/// Scaling factor for `tau_scaled`, when the config has rate laws with a
/// limit to scale towards.
fn optional_scaling(inv: &Invocation) -> Option<f64> {
    let regime = inv.settings.laws?.classify().ok()?;
    let config = inv.settings.crypt().ok()?;
    scaling_factor(&regime, &config).ok()
}

pub fn write_outcomes<W: Write>(out: W, result: &EnsembleResult, wide: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = OUTCOME_HEADER.to_vec();
    if wide {
        header.extend(["sigma_generation", "rho_generation"]);
    }
    w.write_record(&header)?;
    for (i, o) in result.outcomes.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            format_f64(o.tau),
            format_opt(result.scaled_tau_of(i)),
            format_opt(o.sigma.map(|s| s.fraction())),
            format_opt(o.rho.map(|r| r.fraction())),
            o.path.map(|p| p.as_str().to_string()).unwrap_or_default(),
            format_opt(o.stem_type1_time),
            o.status.as_str().to_string(),
        ];
        if wide {
            row.push(o.sigma.map(|s| s.generation.to_string()).unwrap_or_default());
            row.push(o.rho.map(|r| r.generation.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn simulate(inv: &Invocation) -> Result<Finish> {
    let s = &inv.settings;
    let config = s.crypt()?;
    let mut result = run_ensemble(&config, s.variant, s.engine, s.replicates, s.seed)?;
    if let Some(f) = optional_scaling(inv) {
        result = result.scaled(f);
    }
    if result.all_timed_out() {
        crate::diagnostic("warning", "all-timed-out", "every replicate reached max_time");
    }
    write_outcomes(open_out(inv.out.as_deref())?, &result, inv.wide)?;
    if let Some(out) = &inv.out {
        write_metadata(inv, out)?;
    }
    Ok(Finish::Ok)
}

fn classify(inv: &Invocation) -> Result<Finish> {
    let laws = inv.settings.require_laws()?;
    let regime = laws.classify()?;
    write_json(inv.out.as_deref(), &regime_json(&regime))?;
    Ok(Finish::Ok)
}

fn write_ecdf(path: &Path, regime: &Regime, samples: &Samples) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ));
    w.write_record(["quantity", "x", "empirical", "limit"])?;
    let tables: [(&str, &[f64], Option<LimitLaw>); 3] = [
        ("tau_scaled", &samples.tau_scaled, regime.tau_law),
        ("sigma", &samples.sigma, regime.sigma_law),
        ("rho", &samples.rho, regime.rho_law),
    ];
    for (name, sample, law) in tables {
        if sample.is_empty() {
            continue;
        }
        let mut grid = sample.to_vec();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let ecdf = empirical_cdf(sample, &grid)?;
        for (x, f) in grid.iter().zip(ecdf) {
            let limit = law.map(|l| format_f64(l.cdf(*x))).unwrap_or_default();
            w.write_record([name.to_string(), format_f64(*x), format_f64(f), limit])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn verify(inv: &Invocation) -> Result<Finish> {
    let s = &inv.settings;
    let laws = s.require_laws()?;
    let regime = laws.classify()?;
    let config = match s.crypt() {
        Ok(c) => c,
        Err(e) if regime.is_verifiable() => return Err(e.into()),
        // classification only, the numbers are never used
        Err(_) => crypt_regimes::CryptConfig::new(1, 0.0, 0.0, 0.0, 0.0),
    };
    let (report, samples) = verify_regime_with_samples(
        &config,
        &laws,
        s.variant,
        s.engine,
        s.replicates,
        s.seed,
        &Thresholds::default(),
    )?;
    let mut value = serde_json::to_value(&report)?;
    value["regime"] = regime_json(&report.regime);
    write_json(inv.out.as_deref(), &value)?;
    if let Some(samples) = samples {
        let ecdf = inv.ecdf.clone().or_else(|| inv.out.as_ref().map(|o| sidecar(o, ".ecdf.csv")));
        match ecdf {
            Some(path) => write_ecdf(&path, &report.regime, &samples)?,
            None => crate::diagnostic("info", "ecdf-skipped", "no --out or --ecdf given; ECDF table not written"),
        }
    }
    if let Some(out) = &inv.out {
        write_metadata(inv, out)?;
    }
    Ok(match report.verified {
        Some(false) => Finish::CheckFailed,
        _ => Finish::Ok,
    })
}

fn censored_taus(result: &EnsembleResult) -> Vec<f64> {
    result.outcomes.iter().map(|o| o.tau).collect()
}

/// Seed offset that separates the fast engine's replicate streams from the
/// exact simulator's.
const FAST_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

fn oracle_check(inv: &Invocation) -> Result<Finish> {
    let s = &inv.settings;
    let config = s.crypt()?;
    let fast_seed = s.seed.wrapping_add(FAST_SEED_OFFSET);
    let exact = run_ensemble(&config, s.variant, Engine::Exact, s.replicates, s.seed)?;
    let fast = run_ensemble(&config, s.variant, Engine::Fast, s.replicates, fast_seed)?;
    // timed-out replicates enter at tau = max_time in both samples
    let ks = ks_two_sample(&censored_taus(&exact), &censored_taus(&fast))?;
    let value = json!({
        "variant": s.variant,
        "l": config.l,
        "replicates": s.replicates,
        "seed_exact": s.seed,
        "seed_fast": fast_seed,
        "timeouts_exact": exact.timeouts,
        "timeouts_fast": fast.timeouts,
        "ks": ks,
        "pass": !ks.reject,
    });
    write_json(inv.out.as_deref(), &value)?;
    Ok(if ks.reject { Finish::CheckFailed } else { Finish::Ok })
}

pub fn run_command(inv: &Invocation) -> Result<Finish> {
    if inv.emit_config {
        let mut out = open_out(inv.out.as_deref())?;
        out.write_all(inv.settings.to_toml().as_bytes())?;
        out.flush()?;
        return Ok(Finish::Ok);
    }
    let run = || match inv.command {
        Command::Simulate => simulate(inv),
        Command::Classify => classify(inv),
        Command::Verify => verify(inv),
        Command::OracleCheck => oracle_check(inv),
    };
    match inv.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| UsageError::Arguments(format!("cannot start {t} threads: {e}")))?
            .install(run),
        None => run(),
    }
}
