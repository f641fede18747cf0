use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

pub type Row = Map<String, Value>;

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub invariant: String,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub anchors: Vec<String>,
    pub results: Vec<Row>,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Builds a row from (key, value) pairs, keeping their order.
#[macro_export]
macro_rules! row {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut r = $crate::report::Row::new();
        $( r.insert($k.to_string(), serde_json::json!($v)); )*
        r
    }};
}

impl Report {
    pub fn new(command: &str, config: Value, anchors: &[&str]) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            anchors: anchors.iter().map(|a| a.to_string()).collect(),
            results: Vec::new(),
            violations: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Row) {
        self.results.push(row);
    }

    /// Records a violation when `value` exceeds `bound` (NaN counts as exceeding).
    pub fn require_at_most(&mut self, invariant: &str, value: f64, bound: f64) {
        if !(value <= bound) {
            self.violations.push(Violation { invariant: invariant.to_string(), value, bound });
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// results[] flattened; columns are the union of keys in first-seen order.
    pub fn to_csv(&self) -> String {
        let mut columns: Vec<&str> = Vec::new();
        for row in &self.results {
            for k in row.keys() {
                if !columns.contains(&k.as_str()) {
                    columns.push(k);
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&columns).expect("in-memory write");
        for row in &self.results {
            let cells: Vec<String> = columns.iter().map(|c| row.get(*c).map(cell).unwrap_or_default()).collect();
            w.write_record(&cells).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Human-readable form: one line per result row, `key value` pairs.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for row in &self.results {
            let parts: Vec<String> = row.iter().map(|(k, v)| format!("{k} {}", text_cell(v))).collect();
            let _ = writeln!(s, "{}", parts.join("  "));
        }
        s
    }

    pub fn write_to(&self, dir: &Path, format: Format) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("report.{}", format.extension()));
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.render(format).as_bytes())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn text_cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.6}", n.as_f64().unwrap_or(f64::NAN)),
        Value::Null => "inf".to_string(),
        other => cell(other),
    }
}
