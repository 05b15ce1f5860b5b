//! Data files and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, Kind};
use crate::experiments::{Check, Outcome, Table};

#[derive(Debug)]
pub struct OutputError(pub String);

impl std::fmt::Display for OutputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for OutputError {}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> OutputError + '_ {
    move |e| OutputError(format!("{}: {e}", path.display()))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

fn columns(t: &Table) -> Vec<String> {
    t.rows.first().map(|r| r.keys().cloned().collect()).unwrap_or_default()
}

pub fn write_csv(path: &Path, t: &Table) -> Result<(), OutputError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
        .map_err(|e| OutputError(format!("{}: {e}", path.display())))?;
    let cols = columns(t);
    let csv_err = |e: csv::Error| OutputError(format!("{}: {e}", path.display()));
    w.write_record(&cols).map_err(csv_err)?;
    for row in &t.rows {
        w.write_record(cols.iter().map(|c| cell(&row[c]))).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), OutputError> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| OutputError(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Writes every table plus `summary.json`; returns file names relative to `dir`.
pub fn write_outcome(
    dir: &Path,
    kind: Kind,
    seed: Option<u64>,
    format: Format,
    outcome: &Outcome,
) -> Result<Vec<String>, OutputError> {
    let mut files = Vec::new();
    for t in &outcome.tables {
        let name = match format {
            Format::Csv => format!("{}.csv", t.name),
            Format::Json => format!("{}.json", t.name),
        };
        let path = dir.join(&name);
        match format {
            Format::Csv => write_csv(&path, t)?,
            Format::Json => write_json(
                &path,
                &json!({ "kind": kind, "table": t.name, "columns": columns(t), "rows": t.rows }),
            )?,
        }
        files.push(name);
    }
    write_json(
        &dir.join("summary.json"),
        &json!({ "kind": kind, "seed": seed, "summary": outcome.summary, "checks": outcome.checks }),
    )?;
    files.push("summary.json".into());
    Ok(files)
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub generator: &'static str,
    pub version: &'static str,
    pub rng: &'static str,
    pub kind: Kind,
    pub config: Value,
    pub timestamp_unix: u64,
    pub wall_time_s: f64,
    pub threads: usize,
    pub outputs: Vec<String>,
    pub error: Option<String>,
    pub checks: Vec<Check>,
    pub hard_failures: usize,
    pub passed: bool,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, OutputError> {
        let path = dir.join("manifest.json");
        write_json(&path, self)?;
        Ok(path)
    }
}
