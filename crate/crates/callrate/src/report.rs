//! Tabular results and their csv / json / text renderings.
//!
//! Every rendering starts with a provenance line, written as a `#` comment
//! in csv and text and as a `provenance` field in json.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Text => "txt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => {
                let s = format!("{x:.6}");
                let s = s.trim_end_matches('0').trim_end_matches('.');
                if s == "-0" {
                    "0".into()
                } else {
                    s.into()
                }
            }
            other => other.csv(),
        }
    }
}

/// Shortest round-trip representation, so csv output loses nothing.
/// Very small and very large magnitudes use exponent notation.
fn format_num(x: f64) -> String {
    if x.is_finite() {
        let a = x.abs();
        if a != 0.0 && !(1e-5..1e16).contains(&a) {
            format!("{x:e}")
        } else {
            format!("{x}")
        }
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(i64::from(x))
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.into())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Two-column `name,value` table.
    pub fn key_value(name: &str, pairs: Vec<(&str, Cell)>) -> Self {
        let mut t = Self::new(name, &["name", "value"]);
        for (k, v) in pairs {
            t.push(vec![k.into(), v]);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
}

impl Provenance {
    /// First 16 hex digits of SHA-256 over the canonical json of `config`.
    pub fn new(config: &impl Serialize, seed: Option<u64>) -> Self {
        // Value maps are ordered by key, which makes the encoding canonical.
        let value = serde_json::to_value(config).expect("config serializes");
        let digest = Sha256::digest(value.to_string().as_bytes());
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Self {
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: hex,
            seed,
        }
    }

    pub fn comment_line(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!("# callrate {} config={} seed={}", self.version, self.config_hash, seed)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub provenance: Provenance,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => self.render_text(),
        }
    }

    /// One report per table, each carrying the same provenance.
    pub fn split(&self) -> Vec<Report> {
        self.tables
            .iter()
            .map(|t| Report {
                provenance: self.provenance.clone(),
                tables: vec![t.clone()],
            })
            .collect()
    }

    fn render_csv(&self) -> String {
        let mut out = self.provenance.comment_line();
        out.push('\n');
        let many = self.tables.len() > 1;
        for table in &self.tables {
            if many {
                let _ = writeln!(out, "# table: {}", table.name);
            }
            let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
            w.write_record(&table.columns).expect("in-memory write");
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
            }
            out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
        }
        out
    }

    fn render_text(&self) -> String {
        let mut out = self.provenance.comment_line();
        out.push('\n');
        for table in &self.tables {
            let cells: Vec<Vec<String>> = table.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
            let widths: Vec<usize> = (0..table.columns.len())
                .map(|j| {
                    cells
                        .iter()
                        .map(|r| r[j].len())
                        .chain([table.columns[j].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let _ = writeln!(out, "\n[{}]", table.name);
            let line = |row: &[String]| {
                row.iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let _ = writeln!(out, "{}", line(&table.columns));
            for row in &cells {
                let _ = writeln!(out, "{}", line(row));
            }
        }
        out
    }
}
