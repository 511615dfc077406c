//! CSV tables with a fixed float format.
//!
//! Floats are written as `{:.16e}` (17 significant digits, so a value
//! survives the round trip bit for bit). Each file starts with `#` metadata
//! lines naming the run manifest, then the header row. Rows holding a NaN or
//! infinity never reach the main file; they go to `<name>.quarantine.csv`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::Result;

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn is_finite(&self) -> bool {
        match self {
            Cell::Float(v) => v.is_finite(),
            _ => true,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
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

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// File stem; the table is written to `<name>.csv`.
    pub name: String,
    pub columns: Vec<&'static str>,
    /// `key: value` lines written as comments above the header.
    pub meta: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
}

/// Row counts of one written table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Written {
    pub file: String,
    pub rows: usize,
    pub quarantined: usize,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Self { name: name.to_string(), columns: columns.to_vec(), meta: Vec::new(), rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    /// Writes `<dir>/<name>.csv` and, when needed, the quarantine file.
    pub fn write(&self, dir: &Path) -> Result<Written> {
        let (good, bad): (Vec<&Vec<Cell>>, Vec<&Vec<Cell>>) =
            self.rows.iter().partition(|r| r.iter().all(Cell::is_finite));
        let file = format!("{}.csv", self.name);
        self.write_file(&dir.join(&file), &good)?;
        let quarantine = dir.join(format!("{}.quarantine.csv", self.name));
        if !bad.is_empty() {
            log::warn!("{}: {} rows with non-finite values quarantined", file, bad.len());
            self.write_file(&quarantine, &bad)?;
        } else if quarantine.exists() {
            std::fs::remove_file(&quarantine)?;
        }
        Ok(Written { file, rows: good.len(), quarantined: bad.len() })
    }

    fn write_file(&self, path: &Path, rows: &[&Vec<Cell>]) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "# manifest: {MANIFEST_FILE}")?;
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}
