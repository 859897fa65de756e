mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qwrad::scenario::{ScenarioConfig, PRESETS};
use qwrad::verify;

use crate::config::Invalid;
use crate::output::{Format, Outputs};

#[derive(Parser)]
#[command(name = "qwrad", version, about = "Radiation from shaped free-electron quantum wavepackets")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Built-in scenario to start from.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Flat TOML config (dotted keys) or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one value, e.g. --set electron.sigma_z0=2e-7
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "QWRAD_THREADS")]
    threads: Option<usize>,
    /// Grid output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Packet width versus drift and the density at the grating.
    Wavepacket,
    /// Wigner function of the modulated packet.
    Wigner,
    /// Bunching coefficients, B(omega) and optional drift scan.
    Bunching {
        #[arg(long)]
        scan_drift: bool,
    },
    /// Smith-Purcell cut at fixed angle and the single-mode spectrum.
    Spectrum,
    /// Smith-Purcell maps for all spontaneous channels.
    SprMap,
    /// Signed stimulated energy map.
    StimulatedMap,
    /// Pulse statistics, superradiant spectrum and stimulated transfer.
    Ensemble,
    /// Run the acceptance suite and write a pass/fail report.
    Verify,
    /// List built-in presets.
    Presets,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Wavepacket => "wavepacket",
        Command::Wigner => "wigner",
        Command::Bunching { .. } => "bunching",
        Command::Spectrum => "spectrum",
        Command::SprMap => "spr-map",
        Command::StimulatedMap => "stimulated-map",
        Command::Ensemble => "ensemble",
        Command::Verify => "verify",
        Command::Presets => "presets",
    }
}

/// Failed acceptance criteria (exit code 3).
#[derive(Debug)]
struct CriteriaFailed(usize);

impl std::fmt::Display for CriteriaFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} acceptance criteria failed", self.0)
    }
}

impl std::error::Error for CriteriaFailed {}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(Invalid("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let name = command_name(&cli.command);
    match &cli.command {
        Command::Presets => {
            for p in PRESETS {
                println!("{p}");
            }
            Ok(())
        }
        Command::Verify => {
            let reports = verify::run_all()?;
            let mut out = Outputs::new(&c.out)?;
            out.json("verify_report.json", &reports)?;
            out.finish(name, &ScenarioConfig::default(), None)?;
            for r in &reports {
                println!("{}", r.summary());
            }
            let failed = reports.iter().filter(|r| !r.ok()).count();
            println!("{} of {} criteria passed", reports.len() - failed, reports.len());
            if failed > 0 {
                return Err(CriteriaFailed(failed).into());
            }
            Ok(())
        }
        cmd => {
            let cfg = config::load(c.preset.as_deref(), c.config.as_deref(), &c.set)?;
            let resolved = cfg.resolve()?;
            let mut out = Outputs::new(&c.out)?;
            match cmd {
                Command::Wavepacket => commands::wavepacket(&resolved, &mut out)?,
                Command::Wigner => commands::wigner(&resolved, &mut out, c.format)?,
                Command::Bunching { scan_drift } => commands::bunching(&resolved, &mut out, *scan_drift)?,
                Command::Spectrum => {
                    let prov = serde_json::json!({ "config": cfg, "resolved": resolved });
                    commands::spectrum(&resolved, &mut out, prov)?
                }
                Command::SprMap => commands::spr_map(&resolved, &mut out, c.format)?,
                Command::StimulatedMap => commands::stimulated(&resolved, &mut out, c.format)?,
                Command::Ensemble => {
                    commands::check_trials(&resolved)?;
                    commands::ensemble(&resolved, &mut out)?
                }
                Command::Verify | Command::Presets => unreachable!(),
            }
            let files = out.finish(name, &cfg, Some(&resolved))?;
            for f in files {
                println!("{}", c.out.join(f).display());
            }
            Ok(())
        }
    }
}

/// 1 usage or I/O, 2 validation, 3 numerical failure.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(q) = cause.downcast_ref::<qwrad::Error>() {
            if q.is_validation() {
                return 2;
            }
            if q.is_numerical() {
                return 3;
            }
            return 1;
        }
        if cause.is::<Invalid>() {
            return 2;
        }
        if cause.is::<CriteriaFailed>() {
            return 3;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
