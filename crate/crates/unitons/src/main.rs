use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use unitons::frontend::{
    emit_outputs, run_deform, run_factorize, run_sweep, run_verify, ExperimentConfig, Report,
};
use unitons::{Error, Result};

/// Blaschke-Potapov factorization and μ-deformation experiments on
/// polynomial unitary loops.
#[derive(Parser)]
#[command(name = "unitons", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Refactorize the configured loop field and report reconstruction quality.
    Factorize(CommonArgs),
    /// Deform the configured field at a single mu.
    Deform {
        #[command(flatten)]
        common: CommonArgs,
        /// Deformation parameter, written RE,IM (e.g. --mu 0.5,0.25).
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
    },
    /// Measure residuals at the configured grid and its refinement.
    Verify(CommonArgs),
    /// Deform across the mu grid and emit the results table.
    Sweep(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json (and table.csv for sweeps).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override both grid point counts, keeping the configured extents.
    #[arg(long)]
    grid: Option<usize>,
    /// Override a tolerance, e.g. --tol-override gram_min=1e-12 (repeatable).
    #[arg(long = "tol-override", value_name = "KEY=VAL")]
    tol_override: Vec<String>,
}

fn parse_mu(text: &str) -> Result<Complex64> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!(
            "--mu expects RE,IM with exactly one comma, got '{text}'"
        )));
    }
    let re: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("bad real part in --mu '{text}': {e}")))?;
    let im: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("bad imaginary part in --mu '{text}': {e}")))?;
    Ok(Complex64::new(re, im))
}

fn load(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(n) = common.grid {
        cfg.grid = cfg.grid.with_points(n);
    }
    for entry in &common.tol_override {
        let (key, val) = entry.split_once('=').ok_or_else(|| {
            Error::Config(format!("--tol-override expects KEY=VAL, got '{entry}'"))
        })?;
        let val: f64 = val
            .parse()
            .map_err(|e| Error::Config(format!("bad value in --tol-override '{entry}': {e}")))?;
        cfg.tolerances.override_entry(key.trim(), val)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<bool> {
    let (common, report) = match &cli.command {
        Command::Factorize(common) => (common, Report::Factorize(run_factorize(&load(common)?)?)),
        Command::Deform { common, mu } => {
            let mu = parse_mu(mu)?;
            (common, Report::Deform(run_deform(&load(common)?, mu)?))
        }
        Command::Verify(common) => (common, Report::Verify(run_verify(&load(common)?)?)),
        Command::Sweep(common) => (common, Report::Sweep(run_sweep(&load(common)?)?)),
    };

    for c in report.checks() {
        let status = if c.passed { "pass" } else { "FAIL" };
        println!("check {:<18} {}  {}", c.name, status, c.detail);
    }
    if report.checks().is_empty() {
        println!("no checks requested");
    }

    let out_dir = common
        .out
        .clone()
        .or_else(|| config_out(&report).map(PathBuf::from));
    if let Some(dir) = out_dir {
        for path in emit_outputs(&report, &dir)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(report.passed())
}

fn config_out(report: &Report) -> Option<String> {
    let cfg = match report {
        Report::Sweep(r) => &r.config,
        Report::Factorize(r) => &r.config,
        Report::Deform(r) => &r.config,
        Report::Verify(r) => &r.config,
    };
    cfg.out.clone()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
