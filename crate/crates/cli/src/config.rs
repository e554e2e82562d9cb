//! Run configuration: command-line flags layered over an optional
//! `key=value` file.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Purge,
    Adjoint,
    Curvature,
    Hsc,
    Grassmannian,
    CodazziCheck,
    DemaillyCheck,
    SumCheck,
    FibrationScan,
    Acceptance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Derivatives {
    Fd,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Demo {
    Degenerate,
    Random,
}

/// Batch checks and scans for curvature of Hermitian forms.
#[derive(Debug, Parser)]
#[command(name = "hermitia", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Model id, e.g. fs:1, gr:2:4, pl:2:4, flat:2, prod:fs1:fs1, hirz:1.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Polydisc radius of the scan region around the chart center.
    #[arg(long)]
    pub region: Option<f64>,
    /// Evaluation point as comma-separated complex numbers, e.g. `0.1+0.2i,-0.3`.
    #[arg(long)]
    pub point: Option<String>,
    /// Direction vector, same syntax as --point.
    #[arg(long)]
    pub direction: Option<String>,
    /// Weight for fibration models (`b1 + e^λ b2`).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "lambda-max")]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub derivatives: Option<Derivatives>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long = "dimV")]
    pub dim_v: Option<usize>,
    #[arg(long = "dimW")]
    pub dim_w: Option<usize>,
    #[arg(long, value_enum)]
    pub demo: Option<Demo>,
    /// Plain-text `key=value` file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub model: Option<String>,
    pub seed: u64,
    pub samples: Option<usize>,
    pub region: Option<f64>,
    pub point: Option<String>,
    pub direction: Option<String>,
    pub lambda: Option<f64>,
    pub lambda_max: Option<f64>,
    pub tol: Option<f64>,
    pub derivatives: Derivatives,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub instances: Option<usize>,
    #[serde(rename = "dimV")]
    pub dim_v: Option<usize>,
    #[serde(rename = "dimW")]
    pub dim_w: Option<usize>,
    pub demo: Option<Demo>,
}

fn parse_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("config line {}: expected key=value", n + 1))
        })?;
        let key = k.trim().trim_start_matches("--").to_string();
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn take<T: FromStr>(file: &mut BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    match file.remove(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("config key `{key}`: cannot parse `{v}`"))),
    }
}

fn take_enum<T: ValueEnum>(
    file: &mut BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match file.remove(key) {
        None => Ok(None),
        Some(v) => T::from_str(&v, true)
            .map(Some)
            .map_err(|_| CliError::Config(format!("config key `{key}`: unknown value `{v}`"))),
    }
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self, CliError> {
        let mut file = match &cli.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                parse_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let cfg = RunConfig {
            command: cli.command,
            model: cli.model.or(take(&mut file, "model")?),
            seed: cli
                .seed
                .or(take(&mut file, "seed")?)
                .unwrap_or(DEFAULT_SEED),
            samples: cli.samples.or(take(&mut file, "samples")?),
            region: cli.region.or(take(&mut file, "region")?),
            point: cli.point.or(take(&mut file, "point")?),
            direction: cli.direction.or(take(&mut file, "direction")?),
            lambda: cli.lambda.or(take(&mut file, "lambda")?),
            lambda_max: cli.lambda_max.or(take(&mut file, "lambda-max")?),
            tol: cli.tol.or(take(&mut file, "tol")?),
            derivatives: cli
                .derivatives
                .or(take_enum(&mut file, "derivatives")?)
                .unwrap_or(Derivatives::Analytic),
            out: cli.out.or(take(&mut file, "out")?),
            threads: cli.threads.or(take(&mut file, "threads")?),
            instances: cli.instances.or(take(&mut file, "instances")?),
            dim_v: cli.dim_v.or(take(&mut file, "dimV")?),
            dim_w: cli.dim_w.or(take(&mut file, "dimW")?),
            demo: cli.demo.or(take_enum(&mut file, "demo")?),
        };
        if let Some(key) = file.keys().next() {
            return Err(CliError::Config(format!("unknown config key `{key}`")));
        }
        if let Some(t) = cfg.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("--tol must be positive, got {t}")));
            }
        }
        if cfg.threads == Some(0) {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parsing_skips_comments_and_strips_dashes() {
        let m = parse_file("# header\nseed = 5\n--model=fs:1 # trailing\n\n").unwrap();
        assert_eq!(m["seed"], "5");
        assert_eq!(m["model"], "fs:1");
        assert!(parse_file("oops").is_err());
    }
}
