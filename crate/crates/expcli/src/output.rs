//! CSV tables and JSON metadata.
//!
//! Numbers are written with 12 significant digits in scientific notation,
//! `nan`/`inf` spelled out, `\n` line endings and no wall-clock data, so the
//! CSV of a fixed config is byte-identical across runs and thread counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
    Flag(bool),
    /// Not applicable to this row; written as `nan`.
    Missing,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn render(&self, out: &mut String) {
        match self {
            Cell::Text(s) => out.push_str(s),
            Cell::Num(v) => out.push_str(&format_number(*v)),
            Cell::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Cell::Flag(b) => out.push_str(if *b { "1" } else { "0" }),
            Cell::Missing => out.push_str("nan"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.11e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column values of the rows whose `family` is `family`.
    pub fn numbers(&self, family: &str, name: &str) -> Vec<f64> {
        let (Some(fc), Some(c)) = (self.column("family"), self.column(name)) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter(|r| matches!(&r[fc], Cell::Text(f) if f == family))
            .map(|r| match &r[c] {
                Cell::Num(v) => *v,
                Cell::Int(v) => *v as f64,
                Cell::Flag(b) => f64::from(u8::from(*b)),
                Cell::Text(_) | Cell::Missing => f64::NAN,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<f64>,
    pub t: f64,
    pub min_eig: f64,
}

/// Everything a runner produces.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub table: Option<Table>,
    /// Per-run summary numbers keyed by family and name.
    pub diagnostics: BTreeMap<String, Value>,
    pub events: Vec<Event>,
    /// Total positivity events before truncation of `events`.
    pub event_count: usize,
    pub failures: Vec<Failure>,
    /// Rows attempted, counting one per family and control value.
    pub points: usize,
    pub conventions: BTreeMap<String, String>,
}

impl RunOutput {
    /// Distinct `(family, control)` pairs with at least one failure.
    pub fn failed_points(&self) -> usize {
        let mut keys: Vec<(&str, Option<u64>)> =
            self.failures.iter().map(|f| (f.family.as_str(), f.control.map(f64::to_bits))).collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    }

    pub fn status(&self) -> &'static str {
        if self.failures.is_empty() {
            "complete"
        } else if self.failed_points() >= self.points {
            "failed"
        } else {
            "partial"
        }
    }
}

pub fn render_csv(cfg: &ExperimentConfig, table: &Table) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gcl-sim {} {}", env!("CARGO_PKG_VERSION"), cfg.experiment);
    let families: Vec<&str> = cfg.families.iter().map(|f| f.label()).collect();
    let _ = writeln!(s, "# families: {}", families.join(" "));
    let m = &cfg.model;
    let _ = writeln!(
        s,
        "# model: omega0={} gamma={} theta_over_pi={} n_th={} kerr={}",
        format_number(m.omega0),
        format_number(m.gamma),
        format_number(m.theta_over_pi),
        format_number(m.n_th),
        format_number(m.kerr)
    );
    if let Some(d) = &cfg.drive {
        let _ = writeln!(s, "# drive: {}", serde_json::to_string(d).unwrap_or_default());
    }
    if let Some(sw) = &cfg.sweep {
        let _ = writeln!(
            s,
            "# sweep: {} from {} to {} in {} points",
            sw.variable.name(),
            format_number(sw.start),
            format_number(sw.stop),
            sw.points
        );
    }
    let _ = writeln!(s, "# full configuration and diagnostics: {}.json", cfg.stem());
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for row in &table.rows {
        for (k, c) in row.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            c.render(&mut s);
        }
        s.push('\n');
    }
    s
}

pub fn metadata(cfg: &ExperimentConfig, out: &RunOutput, wall_clock_s: f64) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "code_version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment.name(),
        "status": out.status(),
        "config": cfg,
        "columns": out.table.as_ref().map(|t| t.columns.clone()),
        "conventions": out.conventions,
        "diagnostics": out.diagnostics,
        "positivity_events": {
            "count": out.event_count,
            "recorded": out.events,
        },
        "failures": out.failures,
        "points": out.points,
        "wall_clock_s": wall_clock_s,
    })
}

/// Write `<stem>.csv` and `<stem>.json` under `dir`, returning both paths.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    out: &RunOutput,
    wall_clock_s: f64,
) -> Result<(PathBuf, PathBuf), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let stem = cfg.stem();
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    let empty = Table::new(&[]);
    let csv = render_csv(cfg, out.table.as_ref().unwrap_or(&empty));
    fs::write(&csv_path, csv).map_err(|e| CliError::io(&csv_path, e))?;
    let meta = metadata(cfg, out, wall_clock_s);
    let mut text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    text.push('\n');
    fs::write(&json_path, text).map_err(|e| CliError::io(&json_path, e))?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_twelve_significant_digits() {
        assert_eq!(format_number(1.0), "1.00000000000e0");
        assert_eq!(format_number(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(format_number(f64::NAN), "nan");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn table_rows_render_in_order() {
        let cfg = crate::config::parse_config("experiment = \"ringdown\"\n", &[]).unwrap();
        let mut t = Table::new(&["family", "x", "ok"]);
        t.push(vec!["CL".into(), 0.5.into(), true.into()]);
        t.push(vec!["gCL".into(), Cell::Missing, false.into()]);
        let csv = render_csv(&cfg, &t);
        assert!(csv.ends_with("family,x,ok\nCL,5.00000000000e-1,1\ngCL,nan,0\n"), "{csv}");
        assert!(csv.lines().take_while(|l| !l.starts_with("family")).all(|l| l.starts_with('#')));
        assert_eq!(t.numbers("gCL", "ok"), vec![0.0]);
    }
}
