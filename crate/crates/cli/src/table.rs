//! Result tables and their CSV / JSON serialization.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

pub const CSV_HEADER: &str = "quantity,value,error,verdict,anchor";

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Row {
    pub quantity: String,
    pub value: f64,
    pub error: f64,
    pub verdict: String,
    pub anchor: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (csv or json)")),
        }
    }
}

impl ResultTable {
    pub fn push(&mut self, quantity: impl Into<String>, value: f64, error: f64, verdict: impl Into<String>, anchor: &str) {
        self.rows.push(Row { quantity: quantity.into(), value, error, verdict: verdict.into(), anchor: anchor.into() });
    }

    /// Rows violating the table invariant: non-finite value or a negative /
    /// non-finite error.
    pub fn malformed(&self) -> Vec<&Row> {
        self.rows.iter().filter(|r| !r.value.is_finite() || !(r.error >= 0.0 && r.error.is_finite())).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_field(&r.quantity),
                num(r.value),
                num(r.error),
                csv_field(&r.verdict),
                csv_field(&r.anchor)
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  " } else { ",\n  " });
            let _ = write!(
                out,
                "{{\"quantity\": {}, \"value\": {}, \"error\": {}, \"verdict\": {}, \"anchor\": {}}}",
                json_str(&r.quantity),
                num(r.value),
                num(r.error),
                json_str(&r.verdict),
                json_str(&r.anchor)
            );
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes the table to `path`, or to stdout when `path` is `None`.
pub fn emit(table: &ResultTable, format: Format, path: Option<&Path>) -> std::io::Result<()> {
    let text = table.render(format);
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}
