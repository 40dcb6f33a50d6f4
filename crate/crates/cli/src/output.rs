//! Tabular reports rendered as CSV or JSON.
//!
//! Floats are written with 12 significant digits in both formats, so a CSV
//! and a JSON rendering of the same report carry identical numbers.

use std::io::Write;

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(v) => g12(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => g12(*v)
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-4, 1e12)`.
pub fn g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        trim_zeros(format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_owned()),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text))?;
        }
        w.flush().map_err(|e| CliError::io("<output>", e))?;
        Ok(())
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    Value::Object(
                        self.columns
                            .iter()
                            .cloned()
                            .zip(row.iter().map(Cell::json))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

/// Named scalar results plus optional named tables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub summary: Vec<(String, Cell)>,
    pub tables: Vec<(String, Table)>,
}

impl Report {
    pub fn put(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.push((key.to_owned(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(k, _)| k == name).map(|(_, t)| t)
    }

    /// Summary-only reports become a one-row CSV. Otherwise the summary is
    /// written as `# key=value` comment lines ahead of each table.
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        match format {
            Format::Csv if self.tables.is_empty() => {
                let mut t = Table::new(self.summary.iter().map(|(k, _)| k.clone()));
                t.push(self.summary.iter().map(|(_, v)| v.clone()).collect());
                t.write_csv(&mut buf)?;
            }
            Format::Csv => {
                for (k, v) in &self.summary {
                    writeln!(buf, "# {k}={}", v.text()).map_err(|e| CliError::io("<output>", e))?;
                }
                for (i, (name, t)) in self.tables.iter().enumerate() {
                    if i > 0 {
                        buf.push(b'\n');
                    }
                    if self.tables.len() > 1 {
                        writeln!(buf, "# table={name}").map_err(|e| CliError::io("<output>", e))?;
                    }
                    t.write_csv(&mut buf)?;
                }
            }
            Format::Json => {
                let mut root: Map<String, Value> = self
                    .summary
                    .iter()
                    .map(|(k, v)| (k.clone(), v.json()))
                    .collect();
                for (name, t) in &self.tables {
                    root.insert(name.clone(), t.to_json());
                }
                serde_json::to_writer_pretty(&mut buf, &Value::Object(root))?;
                buf.push(b'\n');
            }
        }
        Ok(buf)
    }

    /// `key: value` lines for the terminal.
    pub fn summary_text(&self) -> String {
        self.summary
            .iter()
            .map(|(k, v)| format!("{k}: {}\n", v.text()))
            .collect()
    }
}
