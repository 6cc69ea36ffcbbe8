use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Inclusive `start:stop:steps` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn single(value: f64) -> Self {
        Self { start: value, stop: value, steps: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.stop } else { self.start + span * i as f64 / last })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, steps] = parts.as_slice() else {
            return Err(format!("expected start:stop:steps, got `{s}`"));
        };
        let num = |t: &str| -> Result<f64, String> {
            let v: f64 = t.trim().parse().map_err(|_| format!("`{t}` is not a number"))?;
            if v.is_finite() { Ok(v) } else { Err(format!("`{t}` is not finite")) }
        };
        let steps: usize = steps.trim().parse().map_err(|_| format!("`{steps}` is not a step count"))?;
        if steps == 0 {
            return Err("step count must be at least 1".into());
        }
        let grid = Grid { start: num(start)?, stop: num(stop)?, steps };
        if steps == 1 && grid.start != grid.stop {
            return Err("a one-point grid needs start == stop".into());
        }
        Ok(grid)
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.steps)
    }
}

/// Nine significant digits, shortest form that reads back to the rounded
/// value.
pub fn fmt_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    let out = format!("{rounded}");
    if out == "-0" { "0".into() } else { out }
}

pub fn fmt_flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

pub struct CsvTable {
    schema: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(schema: &'static str, header: &[&'static str]) -> Self {
        Self { schema, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = format!("# schema: {}\n", self.schema).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.header).expect("in-memory write");
            for r in &self.rows {
                w.write_record(r).expect("in-memory write");
            }
            w.flush().expect("in-memory write");
        }
        String::from_utf8(out).expect("csv output is utf-8")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub version: &'static str,
    /// Resolved arguments; `szilard replay` feeds these back to the parser.
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub diagnostics: Value,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Writes `body` to `out` plus its manifest sidecar, or to `stdout` when no
/// path is given.
pub fn emit(
    out: Option<&Path>,
    body: &str,
    manifest: Manifest,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_file(path, body)?;
            write_file(&manifest_path(path), &to_json(&manifest))
        }
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}
