//! Report envelope and output writers.

use std::fmt::Display;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::args::Format;
use crate::config::{ExperimentConfig, Outputs};
use crate::error::{CliError, Result};

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Environment {
    pub tool: &'static str,
    pub version: &'static str,
    pub os: &'static str,
    pub arch: &'static str,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report<'a, R: Serialize> {
    pub schema_version: u32,
    pub config: &'a ExperimentConfig,
    pub environment: Environment,
    pub result: &'a R,
}

/// A rectangular table written as CSV.
#[derive(Debug, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<T: Display>(&mut self, row: impl IntoIterator<Item = T>) {
        let row: Vec<String> = row.into_iter().map(|v| v.to_string()).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::Output {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn write_stdout(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        // the reader went away, as with `| head`
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(|e| CliError::Output {
            path: "<stdout>".into(),
            msg: e.to_string(),
        }),
    }
}

/// Writes the JSON report and CSV table to their files, and the selected
/// format to stdout unless it already went to a file.
pub fn emit<R: Serialize>(cfg: &ExperimentConfig, out: &Outputs, result: &R, table: &Table) -> Result<()> {
    let report = Report {
        schema_version: SCHEMA_VERSION,
        config: cfg,
        environment: Environment::current(),
        result,
    };
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Invariant(e.to_string()))?;
    json.push('\n');
    let csv = table.to_csv();
    if let Some(p) = &out.report {
        write_file(p, &json)?;
    }
    if let Some(p) = &out.csv {
        write_file(p, &csv)?;
    }
    match out.format {
        Format::Json if out.report.is_none() => write_stdout(&json),
        Format::Csv if out.csv.is_none() => write_stdout(&csv),
        _ => Ok(()),
    }
}
