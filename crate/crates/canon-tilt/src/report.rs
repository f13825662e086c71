//! Report rendering. JSON is pretty-printed with sorted keys; CSV has one
//! `# key=value` line per header entry, a column header, LF line endings and
//! 17 significant digits. Non-finite numbers are written as `Infinity`,
//! `-Infinity` and `NaN` in both formats.

use std::fs;
use std::io::{self, Write};

use serde_json::{Map, Value};

use crate::config::{Format, RunConfig, STDOUT};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub config: RunConfig,
    pub result: Value,
    pub table: Table,
    /// Set when an experiment ran but its verdict is `fail`.
    pub failed: bool,
}

/// A number as a JSON value, with the string convention for non-finite ones.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
    } else {
        Value::String(nonfinite(x).to_string())
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn nonfinite(x: f64) -> &'static str {
    if x.is_nan() {
        "NaN"
    } else if x > 0.0 {
        "Infinity"
    } else {
        "-Infinity"
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Int(i) => Value::from(*i),
        Cell::Num(x) => num(*x),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Missing => Value::Null,
    }
}

pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        nonfinite(x).to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cell_csv(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Num(x) => fmt_float(*x),
        Cell::Text(s) => csv_field(s),
        Cell::Missing => String::new(),
    }
}

fn config_value(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("run config serializes")
}

pub fn render_json(r: &Report) -> String {
    let rows: Vec<Value> = r
        .table
        .rows
        .iter()
        .map(|row| {
            let m: Map<String, Value> =
                r.table.columns.iter().zip(row).map(|(k, c)| (k.to_string(), cell_json(c))).collect();
            Value::Object(m)
        })
        .collect();
    let mut top = Map::new();
    top.insert("config".into(), config_value(&r.config));
    top.insert("result".into(), r.result.clone());
    top.insert("rows".into(), Value::Array(rows));
    let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("report serializes");
    s.push('\n');
    s
}

pub fn render_csv(r: &Report) -> String {
    let mut s = String::new();
    s.push_str("# config=");
    s.push_str(&serde_json::to_string(&config_value(&r.config)).expect("run config serializes"));
    s.push('\n');
    if let Some(Value::String(v)) = r.result.get("verdict") {
        s.push_str(&format!("# verdict={v}\n"));
    }
    s.push_str(&r.table.columns.join(","));
    s.push('\n');
    for row in &r.table.rows {
        let cells: Vec<String> = row.iter().map(cell_csv).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn render(r: &Report, format: Format) -> String {
    match format {
        Format::Json => render_json(r),
        Format::Csv => render_csv(r),
    }
}

/// Writes the report to `path`, or standard output for `-`.
pub fn emit(r: &Report, format: Format, path: &str) -> Result<(), CliError> {
    let text = render(r, format);
    let io_err = |e| CliError::Io { path: path.to_string(), source: e };
    if path == STDOUT {
        let mut out = io::stdout().lock();
        out.write_all(text.as_bytes()).map_err(io_err)?;
        out.flush().map_err(io_err)
    } else {
        fs::write(path, text).map_err(io_err)
    }
}
