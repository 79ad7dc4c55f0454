//! Command-line driver for the interference channel simulator.
//!
//! Exit codes: 0 success, 2 configuration or field error, 3 a decode or
//! consistency check failed, 4 the report could not be written.

pub mod config;
pub mod report;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tim_core::codec::CodecError;
use tim_core::gf::{FieldError, FieldSpec, DEFAULT_P};

use config::{parse_dist, ConfigError, ExperimentConfig, RunArgs, RunMode, SweepArgs};
use report::{bounds_record, jess_pair, simulate, JessConfig, JessRecord, ReportRecord};
use sweep::{run_sweep, thread_count, write_csv, SweepError, SweepRecord};

pub use report::SCHEMA_VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CHECK: i32 = 3;
pub const EXIT_OUTPUT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "timsim",
    version,
    about = "Simulate the three-user alternating-connectivity interference channel"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one seeded link-level simulation and write a JSON report.
    Simulate(RunArgs),
    /// Sweep one state probability and write a CSV table plus JSON.
    Sweep(SweepArgs),
    /// Run the four-use cyclic alignment demo.
    JessDemo(JessArgs),
    /// Print the capacity and outer bounds for a distribution.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct JessArgs {
    #[arg(long, default_value_t = DEFAULT_P)]
    pub p: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = DEFAULT_P)]
    pub p: u32,
    /// Seven probabilities for states A..G; defaults to the balanced point.
    #[arg(long)]
    pub dist: Option<String>,
    /// Emit JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("{0}")]
    Check(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(c) => CliError::Config(c),
            SweepError::Codec(c) => CliError::Codec(c),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Config(e.into())
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(ConfigError::Field(FieldError::TooSmall(_))) => "FieldTooSmall",
            CliError::Config(ConfigError::Field(FieldError::NonPrime(_))) => "NonPrimeField",
            CliError::Config(_) => "ConfigError",
            CliError::Codec(_) | CliError::Check(_) => "DecodeFailure",
            CliError::Output { .. } => "OutputError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Codec(_) | CliError::Check(_) => EXIT_CHECK,
            CliError::Output { .. } => EXIT_OUTPUT,
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let fail = |source| CliError::Output {
        path: path.map_or("stdout".into(), |p| p.display().to_string()),
        source,
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(fail),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(fail),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn elapsed_ms(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e3
}

fn check(violations: &[String]) -> Result<(), CliError> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(violations.join("; ")))
    }
}

fn run_jess(p: u32, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let t0 = Instant::now();
    let spec = FieldSpec::new(p)?;
    let (with, without, violations) = jess_pair(&spec, seed)?;
    let rec = JessRecord {
        schema_version: SCHEMA_VERSION,
        config: JessConfig { p, seed },
        with_resolving_state: with,
        without_resolving_state: without,
        violations,
        wall_clock_ms: elapsed_ms(t0),
    };
    emit(out, &to_json(&rec))?;
    check(&rec.violations)
}

fn run_simulate(cfg: ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    if cfg.mode == RunMode::JessDemo {
        return run_jess(cfg.p, cfg.seeds.channel, out);
    }
    let t0 = Instant::now();
    let report = simulate(&cfg)?;
    let rec = ReportRecord {
        schema_version: SCHEMA_VERSION,
        config: cfg,
        violations: report.violations(),
        report,
        wall_clock_ms: elapsed_ms(t0),
    };
    emit(out, &to_json(&rec))?;
    check(&rec.violations)
}

fn run_sweep_cmd(cfg: ExperimentConfig, out: config::Outputs) -> Result<(), CliError> {
    let t0 = Instant::now();
    let threads = thread_count()?;
    let points = run_sweep(&cfg, threads)?;
    let vary = cfg.sweep.as_ref().expect("sweep config").vary.tag();
    let mut table = Vec::new();
    write_csv(&mut table, vary, &points)
        .map_err(|e| CliError::Check(format!("csv encoding: {e}")))?;
    let rec = SweepRecord {
        schema_version: SCHEMA_VERSION,
        config: cfg,
        points,
        wall_clock_ms: elapsed_ms(t0),
    };
    emit(out.csv.as_deref(), &String::from_utf8_lossy(&table))?;
    if let Some(json) = out.json.as_deref() {
        emit(Some(json), &to_json(&rec))?;
    }
    let bad: Vec<String> = rec
        .points
        .iter()
        .flat_map(|p| {
            p.violations
                .iter()
                .map(move |v| format!("point {}: {v}", p.index))
        })
        .collect();
    check(&bad)
}

fn run_bounds(args: &BoundsArgs) -> Result<(), CliError> {
    let spec = FieldSpec::new(args.p)?;
    let dist = match &args.dist {
        Some(s) => parse_dist(s)?,
        None => tim_core::channel::StateDistribution::balanced(),
    };
    let rec = bounds_record(&dist, &spec);
    let text = if args.json {
        to_json(&rec)
    } else {
        rec.to_text()
    };
    emit(None, &text)
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let (cfg, out) = args.resolve()?;
            run_simulate(cfg, out.json.as_deref())
        }
        Command::Sweep(args) => {
            let (cfg, out) = args.resolve()?;
            run_sweep_cmd(cfg, out)
        }
        Command::JessDemo(args) => run_jess(args.p, args.seed, args.out.as_deref()),
        Command::Bounds(args) => run_bounds(&args),
    }
}

/// Parses `argv` (program name first), runs, and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            e.exit_code()
        }
    }
}
