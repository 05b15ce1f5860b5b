//! Experiment runner for the `swssb` command-line tool.
//!
//! A run reads a TOML config, executes one experiment and writes its tables
//! (CSV or JSON), a `summary.json` and a `manifest.json` into an output
//! directory. Data files depend only on the config and seed; the manifest
//! additionally records timing and the thread count.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::json;

pub use config::{validate, ExperimentConfig, Kind, Violation};
pub use output::Manifest;

/// Exit code for a run whose hard checks all passed.
pub const EXIT_OK: i32 = 0;
/// A hard check failed or the experiment raised an error.
pub const EXIT_FAILED: i32 = 1;
/// The config did not validate or could not be read.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug)]
pub enum RunError {
    Config(Vec<Violation>),
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(v) => {
                let lines: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "invalid config:\n  {}", lines.join("\n  "))
            }
            RunError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Io(_) => EXIT_FAILED,
        }
    }
}

/// Threads the data-parallel core will use for this run.
pub fn effective_threads(exec: swssb::exec::Execution) -> usize {
    #[cfg(feature = "parallel")]
    if exec == swssb::exec::Execution::Parallel {
        return rayon::current_num_threads();
    }
    let _ = exec;
    1
}

/// Failed hard checks; soft checks never fail a run.
pub fn hard_failures(checks: &[experiments::Check]) -> usize {
    checks.iter().filter(|c| c.hard && !c.passed).count()
}

/// Validates `config` for `kind` (or its own `kind`), runs it and writes all
/// outputs into `out`. The manifest is written even when the experiment fails.
pub fn execute(config: &ExperimentConfig, kind: Option<Kind>, out: &Path) -> Result<Manifest, RunError> {
    let violations = validate(config, kind);
    if !violations.is_empty() {
        return Err(RunError::Config(violations));
    }
    let kind = kind.or(config.kind).expect("validated");
    let params = config::Params::parse(kind, &config.params).map_err(|v| RunError::Config(vec![v]))?;
    std::fs::create_dir_all(out).map_err(|e| RunError::Io(format!("{}: {e}", out.display())))?;

    let start = Instant::now();
    let result = experiments::run(&params, config.seed, config.execution);
    let (outputs, checks, error) = match result {
        Ok(outcome) => {
            let files = output::write_outcome(out, kind, config.seed, config.format, &outcome)
                .map_err(|e| RunError::Io(e.to_string()))?;
            (files, outcome.checks, None)
        }
        Err(e) => (Vec::new(), Vec::new(), Some(e.to_string())),
    };
    let hard_failures = hard_failures(&checks);
    let manifest = Manifest {
        generator: "swssb",
        version: env!("CARGO_PKG_VERSION"),
        rng: swssb::rng::GENERATOR,
        kind,
        config: json!({
            "kind": kind,
            "seed": config.seed,
            "format": config.format,
            "execution": config.execution,
            "params": params,
        }),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        wall_time_s: start.elapsed().as_secs_f64(),
        threads: effective_threads(config.execution),
        outputs,
        passed: error.is_none() && hard_failures == 0,
        error,
        checks,
        hard_failures,
    };
    manifest.write(out).map_err(|e| RunError::Io(e.to_string()))?;
    Ok(manifest)
}
