//! Library side of the `hermitia` binary, so the dispatch can be driven
//! in-process by tests.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

pub use config::{Cli, Command, RunConfig};
pub use report::{Record, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<hermitia::Error> for CliError {
    fn from(e: hermitia::Error) -> Self {
        use hermitia::Error as E;
        match e {
            E::UnknownModel(_)
            | E::InvalidModel(_)
            | E::DimensionMismatch(_)
            | E::OutOfDomain { .. } => CliError::Config(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

/// Runs the configured command, honoring `--threads`.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let records = with_threads(cfg.threads, || commands::dispatch(cfg))??;
    Ok(Report::new(
        cfg.clone(),
        records,
        start.elapsed().as_secs_f64(),
    ))
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(
    _threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    Ok(f())
}

/// Writes a line to standard output, ignoring a closed pipe.
pub fn say(line: &str) {
    let _ = writeln!(io::stdout().lock(), "{line}");
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match RunConfig::resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    say(report.table().trim_end());
    let json = report.to_json();
    match &cfg.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &json) {
                eprintln!("cannot write report to {}: {e}", path.display());
                return 3;
            }
            say(&format!("report written to {}", path.display()));
        }
        None => say(&json),
    }
    if report.pass {
        0
    } else {
        1
    }
}
