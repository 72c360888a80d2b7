//! `fiberphase`: batch simulator for photon phases and helicity in curved fibers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use fiberphase::commands::{self, Report, RunError};
use fiberphase::config::{OutputFormat, RunConfig};

const EXIT_VERIFY_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "fiberphase", version, about = "Geometric phase and helicity of light in curved fibers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time series of direction, phases and helicity along the fiber.
    Simulate(Args),
    /// Property checks of the analytic solution against the brute-force propagator.
    Verify(Args),
    /// Helicity inversion scan over the configured grid.
    Scan(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files. Without it the main table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format, overriding the config's `outputs` list.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let line = serde_json::json!({ "error": kind, "message": message, "exit_code": code });
    eprintln!("{line}");
    ExitCode::from(code)
}

fn run_error(e: RunError) -> ExitCode {
    fail(e.kind(), &e.to_string(), e.exit_code() as u8)
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("FIBERPHASE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("FIBERPHASE_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    RunConfig::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(report: &Report, formats: &[OutputFormat], out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (name, table) in &report.tables {
                for &format in formats {
                    let path = dir.join(format!("{name}.{}", format.extension()));
                    fs::write(&path, table.render(format)).with_context(|| format!("writing {}", path.display()))?;
                }
            }
        }
        None => {
            let (_, table) = &report.tables[0];
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(table.render(formats[0]).as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Simulate(a) | Command::Verify(a) | Command::Scan(a) => a,
    };
    if let Err(msg) = configure_threads() {
        return fail("config", &msg, 2);
    }
    let cfg = match load_config(&args.config) {
        Ok(cfg) => cfg,
        Err(msg) => return fail("config", &msg, 2),
    };
    let formats: Vec<OutputFormat> = match args.format {
        Some(f) => vec![f.into()],
        None => cfg.outputs.clone(),
    };

    let (report, passed) = match &cli.command {
        Command::Simulate(_) => (commands::simulate(&cfg), true),
        Command::Scan(_) => (commands::scan(&cfg), true),
        Command::Verify(_) => match commands::verify(&cfg) {
            Ok(v) => (Ok(v.report), v.all_pass),
            Err(e) => (Err(e), false),
        },
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => return run_error(e),
    };
    if let Err(e) = emit(&report, &formats, args.out.as_deref()) {
        return fail("io", &format!("{e:#}"), 1);
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        fail("verification_failed", "one or more properties exceeded their bound", EXIT_VERIFY_FAILED)
    }
}
