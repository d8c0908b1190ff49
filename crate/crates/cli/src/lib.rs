//! Config-driven experiment runner for the `polarmem` library.
//!
//! Each configuration file names one experiment kind. `run` writes CSV tables,
//! optional SVG views and a `summary.json` with the outcome of every check;
//! `verify` recomputes the same checks from the CSV files alone.

pub mod checks;
pub mod config;
pub mod error;
pub mod experiments;
pub mod records;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use checks::{Check, Outputs};
use config::ExperimentConfig;
use error::CliError;
use records::{write_atomic, SUMMARY_JSON};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub config_hash: String,
    pub params_hash: String,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
    pub files: Vec<String>,
    pub flagged: Vec<String>,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

pub struct RunReport {
    pub output_dir: PathBuf,
    pub summary: Summary,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.summary.flagged.is_empty() {
            EXIT_OK
        } else {
            EXIT_NON_CONVERGENCE
        }
    }
}

/// Runs one configuration and writes its artifacts.
pub fn run_config(config_path: &Path, out_override: Option<&Path>) -> Result<RunReport, CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let result = experiments::run(&cfg)?;
    let dir = out_override.map_or_else(|| cfg.resolve_output(config_path), Path::to_path_buf);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let mut files = Vec::new();
    let tables = result
        .outputs
        .tables()
        .map_err(|e| CliError::artifact(&dir, e.to_string()))?;
    for (name, bytes) in tables {
        write_atomic(&dir.join(name), &bytes)?;
        files.push(name.to_owned());
    }
    for (name, svg) in &result.plots {
        write_atomic(&dir.join(name), svg.as_bytes())?;
        files.push(name.clone());
    }
    let checks = result.outputs.checks();
    let summary = Summary {
        name: cfg.name.clone(),
        kind: cfg.experiment.kind().into(),
        seed: cfg.seed,
        config_hash: cfg.config_hash(),
        params_hash: cfg.params_hash(),
        started_unix,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        files,
        flagged: result.flagged,
        all_passed: checks.iter().all(|c| c.pass),
        checks,
    };
    let json = serde_json::to_vec_pretty(&summary).expect("serializable summary");
    write_atomic(&dir.join(SUMMARY_JSON), &json)?;
    Ok(RunReport { output_dir: dir, summary })
}

/// Recomputes the checks of a finished run from its CSV files.
pub fn verify_dir(dir: &Path) -> Result<(String, Vec<Check>), CliError> {
    let path = dir.join(SUMMARY_JSON);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let summary: Summary = serde_json::from_str(&text).map_err(|e| CliError::artifact(&path, e.to_string()))?;
    let outputs = Outputs::read(dir, &summary.kind)?;
    Ok((summary.kind, outputs.checks()))
}

pub fn print_checks(checks: &[Check]) {
    for c in checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
}
