//! Experiment output: one table per command, written as CSV with a JSON
//! metadata sidecar or as a single JSON document.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub table: Table,
    pub summary: Map<String, Value>,
    /// Additional artifacts as `(file name, contents)`, written verbatim.
    pub files: Vec<(String, String)>,
}

/// Invocation details echoed into the metadata.
pub struct RunInfo<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub format: Format,
    pub config: &'a BTreeMap<String, String>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn fingerprint() -> Value {
    json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "profile": if cfg!(debug_assertions) { "debug" } else { "release" },
    })
}

fn meta(info: &RunInfo, report: &Report, files: &[String]) -> Value {
    json!({
        "command": info.command,
        "seed": info.seed,
        "format": info.format.as_str(),
        "config": info.config,
        "build": fingerprint(),
        "rows": report.table.rows.len(),
        "files": files,
        "summary": report.summary,
    })
}

fn write(path: &Path, contents: &[u8]) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Writes the report under `out` and returns the paths written.
pub fn emit(out: &Path, info: &RunInfo, report: &Report) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut written = Vec::new();
    let mut names = Vec::new();
    for (name, contents) in &report.files {
        let p = out.join(name);
        write(&p, contents.as_bytes())?;
        names.push(name.clone());
        written.push(p);
    }
    match info.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.table.columns)
                .and_then(|_| {
                    report
                        .table
                        .rows
                        .iter()
                        .try_for_each(|r| w.write_record(r.iter().map(cell)))
                })
                .map_err(|e| CliError::Other(e.to_string()))?;
            let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
            let table = format!("{}.csv", info.command);
            let p = out.join(&table);
            write(&p, &bytes)?;
            written.push(p);
            names.push(table);
            let p = out.join(format!("{}.meta.json", info.command));
            write(&p, pretty(&meta(info, report, &names)).as_bytes())?;
            written.push(p);
        }
        Format::Json => {
            let doc = json!({
                "meta": meta(info, report, &names),
                "columns": report.table.columns,
                "rows": report.table.rows,
            });
            let p = out.join(format!("{}.json", info.command));
            write(&p, pretty(&doc).as_bytes())?;
            written.push(p);
        }
    }
    Ok(written)
}
