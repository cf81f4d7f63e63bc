//! Result tables, CSV emission and the metadata sidecar.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    /// Floats carry 17 significant digits.
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn compare(&self, other: &Cell) -> Ordering {
        match (self, other) {
            (Cell::Float(a), Cell::Float(b)) => a.total_cmp(b),
            (Cell::Int(a), Cell::Int(b)) => a.cmp(b),
            (Cell::Text(a), Cell::Text(b)) => a.cmp(b),
            _ => self.render().cmp(&other.render()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub schema: &'static str,
    pub columns: Vec<&'static str>,
    /// Columns the rows are sorted on, in priority order.
    pub keys: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(schema: &'static str, columns: &[&'static str], keys: &[&'static str]) -> Self {
        assert!(keys.iter().all(|k| columns.contains(k)), "sort keys must be columns");
        ResultTable {
            schema,
            columns: columns.to_vec(),
            keys: keys.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the {} schema",
            self.schema
        );
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn sort(&mut self) {
        let idx: Vec<usize> = self
            .keys
            .iter()
            .map(|k| self.columns.iter().position(|c| c == k).expect("checked in new"))
            .collect();
        self.rows.sort_by(|a, b| {
            idx.iter()
                .map(|&i| a[i].compare(&b[i]))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        });
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {path:?}"))?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush().with_context(|| format!("cannot write {path:?}"))?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub command: &'a str,
    pub schema: &'a str,
    pub version: &'a str,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub rows: usize,
    pub wall_time_s: f64,
    pub summary: serde_json::Value,
}

/// `<out>.meta.json` next to the CSV.
pub fn metadata_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

pub fn write_metadata(out: &Path, meta: &Metadata) -> Result<()> {
    let path = metadata_path(out);
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(&path, text + "\n").with_context(|| format!("cannot write {path:?}"))
}
