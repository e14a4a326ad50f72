//! Tabular results and their CSV/JSON serialization.

use std::io::Write;

use serde_json::{json, Map, Value};

/// Output encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}' (expected csv or json)")),
        }
    }
}

/// Rounds to `digits` significant digits and prints the shortest string that
/// reads back to the rounded value. Magnitudes outside `[1e-5, 1e15)` use
/// exponent notation.
pub fn format_float(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded = round_significant(x, digits);
    let mag = rounded.abs();
    if (1e-5..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.max(1) - 1, x)
        .parse()
        .expect("formatted float parses")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }

    fn render(&self, digits: usize) -> String {
        match self {
            Cell::Num(v) => format_float(*v, digits),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self, digits: usize) -> Value {
        match self {
            Cell::Num(v) => {
                let r = round_significant(*v, digits);
                serde_json::Number::from_f64(r).map_or_else(|| Value::String(format_float(r, digits)), Value::Number)
            }
            Cell::Int(v) => json!(v),
            Cell::Text(s) => Value::String(s.clone()),
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

/// A result table with a provenance line and optional named scalar markers.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// Full resolved command line, e.g. `mu2amp design --mu2 0.5 ...`.
    pub provenance: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub markers: Vec<(String, f64)>,
}

impl Table {
    pub fn new(provenance: String, columns: &[&str]) -> Self {
        Self {
            provenance,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            markers: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn marker(&mut self, name: &str, value: f64) {
        self.markers.push((name.to_owned(), value));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column, `None` for text cells.
    pub fn values(&self, name: &str) -> Vec<Option<f64>> {
        let idx = self.column(name).unwrap_or_else(|| panic!("no column '{name}'"));
        self.rows.iter().map(|r| r[idx].as_f64()).collect()
    }

    pub fn write(&self, out: &mut dyn Write, format: Format, digits: usize) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out, digits),
            Format::Json => self.write_json(out, digits),
        }
    }

    fn write_csv(&self, out: &mut dyn Write, digits: usize) -> std::io::Result<()> {
        writeln!(out, "# {}", self.provenance)?;
        for (name, value) in &self.markers {
            writeln!(out, "# marker {name}={}", format_float(*value, digits))?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render(digits)))?;
        }
        w.flush()
    }

    fn write_json(&self, out: &mut dyn Write, digits: usize) -> std::io::Result<()> {
        let markers: Map<String, Value> = self
            .markers
            .iter()
            .map(|(k, v)| (k.clone(), Cell::Num(*v).to_json(digits)))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|c| c.to_json(digits)).collect()))
            .collect();
        let doc = json!({
            "comment": self.provenance,
            "markers": markers,
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)
    }
}
