//! Tabular reports written as CSV (header, rows, `#` footer) or as one JSON
//! object with `params`, `rows` and `summary`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
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

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
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
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Shortest round-trip digits; exponent form outside `[1e-3, 1e16)`.
fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-3..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{:e}", v)
    }
}

impl Cell {
    /// Shortest round-trip decimal for numbers.
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // JSON has no NaN or infinities.
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Default)]
pub struct Report {
    pub params: Vec<(String, Cell)>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Report {
    pub fn new(command: &str, header: Vec<&'static str>) -> Self {
        let mut r = Self {
            header,
            ..Self::default()
        };
        r.param("tool", format!("qclab {}", env!("CARGO_PKG_VERSION")));
        r.param("command", command);
        r
    }

    pub fn param(&mut self, key: &str, value: impl Into<Cell>) {
        self.params.push((key.to_string(), value.into()));
    }

    pub fn summary(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.push((key.to_string(), value.into()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        for (k, v) in self.params.iter().chain(&self.summary) {
            let _ = writeln!(out, "# {}={}", k, v.csv());
        }
        out
    }

    pub fn to_json(&self) -> String {
        let object = |pairs: &[(String, Cell)]| {
            Value::Object(
                pairs
                    .iter()
                    .map(|(k, v)| (k.clone(), v.json()))
                    .collect::<Map<_, _>>(),
            )
        };
        let rows = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    self.header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), c.json()))
                        .collect(),
                )
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("params".into(), object(&self.params));
        doc.insert("rows".into(), Value::Array(rows));
        doc.insert("summary".into(), object(&self.summary));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> std::io::Result<()> {
        let text = match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        };
        match out {
            Some(path) => std::fs::write(path, text),
            None => std::io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}
