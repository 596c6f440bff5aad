//! Command-line front end. Every command returns an exit code: 0 on success,
//! 1 when it finished with warnings, 2 on bad input or configuration.

/// `println!` that ignores a closed stdout (for example when piped into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

mod diagnose;
mod discover;
mod generate;
mod repair;
mod stats;

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

#[derive(Debug, Parser)]
#[command(name = "opsinfer", version, about = "Statistical analysis of IT operations data")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic packet trace with planted dependencies.
    GenTrace(generate::GenTraceArgs),
    /// Generate a synthetic metrics dataset with planted violation causes.
    GenMetrics(generate::GenMetricsArgs),
    /// Discover service dependencies from packet traces.
    Discover(discover::DiscoverArgs),
    /// Train an SLO classifier and derive, cluster or retrieve signatures.
    Diagnose(diagnose::DiagnoseArgs),
    /// Simulate the watchdog / repair loop over a fleet.
    RepairSim(repair::RepairSimArgs),
    /// Mine a repair log for watchdog reliability and policy metrics.
    RepairMine(repair::RepairMineArgs),
    /// Statistical primitives on numbers read from stdin.
    #[command(subcommand)]
    Stats(stats::StatsCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Warnings,
}

#[derive(Debug)]
pub struct CliError(pub String);

impl CliError {
    fn new(message: impl Display) -> Self {
        Self(message.to_string())
    }
}

type CmdResult = Result<Outcome, CliError>;

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::GenTrace(a) => generate::gen_trace(a),
        Command::GenMetrics(a) => generate::gen_metrics(a),
        Command::Discover(a) => discover::run(a),
        Command::Diagnose(a) => diagnose::run(a),
        Command::RepairSim(a) => repair::simulate(a),
        Command::RepairMine(a) => repair::mine(a),
        Command::Stats(c) => stats::run(c),
    };
    match result {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::Warnings) => 1,
        Err(CliError(message)) => {
            eprintln!("error: {message}");
            2
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".truth");
    PathBuf::from(s)
}

/// Config file values, falling back to `T::default()` when no file is given.
fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => toml::from_str(&read_file(p)?).map_err(|e| CliError(format!("{}: {e}", p.display()))),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s
}

fn echo_line<T: serde::Serialize>(command: &str, config: &T) -> String {
    format!("opsinfer {command} config={}", serde_json::to_string(config).expect("configs serialise"))
}
