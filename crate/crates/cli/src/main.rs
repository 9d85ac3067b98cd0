//! `relay-rates`: evaluate, optimize and sweep two-relay schemes, check the
//! elimination derivation, and run the acceptance suite.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on a bad
//! configuration.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use relay_rates::schemes::SchemeId;

use config::{Command, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "relay-rates", version, about = "Rate toolkit for the two-relay channel")]
struct Cli {
    /// rates | optimize | sweep | verify-fm | selftest
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pathloss exponent.
    #[arg(long)]
    gamma: Option<f64>,
    /// Common power of all three transmitters.
    #[arg(long)]
    power: Option<f64>,
    /// Comma-separated scheme names, e.g. SNNC_RS_JOINT,DF_SNNC.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    VerificationFailed,
}

fn build_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(c) = cfg.command {
        if c != cli.command {
            anyhow::bail!("config `command` is {c:?} but {:?} was requested", cli.command);
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Some(g) = cli.gamma {
        cfg.gamma = g;
    }
    if let Some(p) = cli.power {
        cfg.powers = [p; 3];
    }
    if let Some(list) = &cli.schemes {
        cfg.schemes = list.iter().map(|s| s.parse::<SchemeId>()).collect::<Result<_, _>>()?;
    }
    cfg.validate_boxes()?;
    if let Some(dir) = &cfg.out {
        commands::ensure_writable(dir)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match commands::run(cli.command, &cfg) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
    }
}
