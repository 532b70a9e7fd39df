//! Report envelope, canonical JSON and CSV output.

use std::io::Write;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig};

const LITERATURE_TEXT: &str = include_str!("../data/literature.toml");

#[derive(Debug, Clone, Serialize)]
pub struct BasisInfo {
    pub source: String,
    pub sha256: String,
}

impl BasisInfo {
    pub fn new(source: impl Into<String>, bytes: &[u8]) -> Self {
        let digest = Sha256::digest(bytes);
        Self {
            source: source.into(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiteratureRow {
    pub r: f64,
    pub ccsd: f64,
    pub ccsd_t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Literature {
    pub note: String,
    pub h4: Vec<LiteratureRow>,
}

impl Literature {
    pub fn bundled() -> Self {
        toml::from_str(LITERATURE_TEXT).expect("bundled literature table parses")
    }

    pub fn h4_at(&self, r: f64) -> Option<&LiteratureRow> {
        self.h4.iter().find(|row| (row.r - r).abs() < 1e-9)
    }
}

/// Rows flattened for CSV; cells are already formatted.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub trait CellValue {
    fn render(&self) -> String;
}

impl CellValue for f64 {
    /// Shortest round-trip form; exponent notation below 1e-4 so residuals stay readable.
    fn render(&self) -> String {
        if *self != 0.0 && self.abs() < 1e-4 {
            format!("{self:e}")
        } else {
            self.to_string()
        }
    }
}

macro_rules! plain_cell {
    ($($t:ty),*) => {
        $(impl CellValue for $t {
            fn render(&self) -> String {
                self.to_string()
            }
        })*
    };
}

plain_cell!(usize, u64, u32, i32, String, &str);

pub fn cell(x: impl CellValue) -> String {
    x.render()
}

pub fn opt_cell<T: CellValue>(x: Option<T>) -> String {
    x.map(|v| v.render()).unwrap_or_default()
}

/// What one subcommand produced.
pub struct Outcome {
    pub rows: Value,
    pub table: Table,
    pub errors: Vec<cse_core::pipeline::RowError>,
    /// Problems that are not tied to a failed geometry.
    pub warnings: Vec<String>,
    pub extra: Map<String, Value>,
    pub curves: Option<Vec<cse_core::pipeline::CurvePoint>>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    basis: &'a BasisInfo,
    config: &'a RunConfig,
    rows: &'a Value,
    errors: &'a [cse_core::pipeline::RowError],
    warnings: &'a [String],
}

/// Recursively rebuilds objects with keys in sorted order.
pub fn canonical(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonical(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}

pub fn render(command: &str, config: &RunConfig, basis: &BasisInfo, outcome: &Outcome, out: impl Write) -> Result<()> {
    match config.format() {
        Format::Csv => outcome.table.write(out),
        Format::Json => {
            let envelope = Envelope {
                command,
                version: env!("CARGO_PKG_VERSION"),
                seed: config.cse.seed,
                basis,
                config,
                rows: &outcome.rows,
                errors: &outcome.errors,
                warnings: &outcome.warnings,
            };
            let mut value = serde_json::to_value(&envelope)?;
            if let Value::Object(map) = &mut value {
                for (k, v) in &outcome.extra {
                    map.insert(k.clone(), v.clone());
                }
            }
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &canonical(value))?;
            writeln!(out)?;
            Ok(())
        }
    }
}
