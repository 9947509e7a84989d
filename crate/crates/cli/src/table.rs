//! Typed result tables written as CSV with a `#` provenance header.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("row {row} has {got} cells, expected {expected}")]
    RowLength { row: usize, got: usize, expected: usize },
    #[error("malformed CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    /// Integers first, then floats, then text.
    pub fn parse(raw: &str) -> Cell {
        if let Ok(i) = raw.parse::<i64>() {
            Cell::Int(i)
        } else if let Ok(x) = raw.parse::<f64>() {
            Cell::Float(x)
        } else {
            Cell::Text(raw.to_string())
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => f.write_str(&format_float(*x)),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
    pub wall_time_s: f64,
}

impl Provenance {
    pub fn new(config_json: &str, wall_time_s: f64) -> Self {
        Provenance { config_hash: config_hash(config_json), code_version: code_version(), wall_time_s }
    }
}

pub fn code_version() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

/// Hex SHA-256 of the canonical config text.
pub fn config_hash(config_json: &str) -> String {
    format!("{:x}", Sha256::digest(config_json.as_bytes()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: Option<Provenance>,
}

impl ResultsTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        ResultsTable { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new(), provenance: None }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), TableError> {
        if row.len() != self.columns.len() {
            return Err(TableError::RowLength { row: self.rows.len(), got: row.len(), expected: self.columns.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = Some(p);
        self
    }

    /// Parse a header-plus-rows CSV; `#` lines are read as provenance.
    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let csv_err = |e: csv::Error| TableError::Csv(e.to_string());
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let columns: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let mut table = ResultsTable::new(columns);
        for record in reader.records() {
            let record = record.map_err(csv_err)?;
            table.push(record.iter().map(Cell::parse).collect())?;
        }
        table.provenance = parse_provenance(text);
        Ok(table)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Header and rows, without provenance.
    pub fn body(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(quoted).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        if let Some(p) = &self.provenance {
            let _ = writeln!(s, "# config_hash: {}", p.config_hash);
            let _ = writeln!(s, "# code_version: {}", p.code_version);
            let _ = writeln!(s, "# wall_time_s: {:.3}", p.wall_time_s);
        }
        s.push_str(&self.body());
        s
    }
}

fn quoted(cell: &Cell) -> String {
    let s = cell.to_string();
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

/// Everything except the `#` lines of a CSV document.
pub fn csv_body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).flat_map(|l| [l, "\n"]).collect()
}

fn parse_provenance(text: &str) -> Option<Provenance> {
    let field = |key: &str| {
        text.lines()
            .filter_map(|l| l.strip_prefix('#'))
            .find_map(|l| l.trim().strip_prefix(key).and_then(|r| r.strip_prefix(':')).map(|v| v.trim().to_string()))
    };
    Some(Provenance {
        config_hash: field("config_hash")?,
        code_version: field("code_version")?,
        wall_time_s: field("wall_time_s")?.parse().ok()?,
    })
}
