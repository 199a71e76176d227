//! Tabular results and their CSV form.
//!
//! Files start with `#` metadata lines (crate version, config hash, free
//! key/value pairs), then a header row, then data. Floats are written in
//! shortest round-trip form and lines end in LF.

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::{render_config, SimulationConfig};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Value {
    pub fn render(&self) -> String {
        match self {
            // Debug is the shortest representation that parses back exactly
            Value::Float(x) => format!("{x:?}"),
            Value::Int(i) => i.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            Value::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    /// Panics on a row of the wrong width; rows are built by this crate.
    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match header"
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[i].as_f64().unwrap_or(f64::NAN))
                .collect(),
        )
    }
}

/// Metadata written above the header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    /// Version plus the hash of the canonical config text.
    pub fn for_config(config: &SimulationConfig) -> Self {
        Metadata {
            entries: vec![
                ("version".into(), FORMAT_VERSION.into()),
                ("config_sha256".into(), config_hash(config)),
            ],
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }
}

/// SHA-256 of the canonical config text, output locations excluded.
pub fn config_hash(config: &SimulationConfig) -> String {
    let physics = SimulationConfig {
        out: None,
        cache_dir: None,
        ..config.clone()
    };
    let digest = Sha256::digest(render_config(&physics).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn to_csv_string(table: &Table, meta: &Metadata) -> Result<String> {
    let mut out = Vec::new();
    for (k, v) in &meta.entries {
        writeln!(out, "# {k} = {v}").expect("writing to a Vec cannot fail");
    }
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut out);
        let fail = |e: csv::Error| Error::invalid("csv", e.to_string());
        w.write_record(&table.columns).map_err(fail)?;
        for r in &table.rows {
            w.write_record(r.iter().map(Value::render)).map_err(fail)?;
        }
        w.flush()
            .map_err(|e| Error::invalid("csv", e.to_string()))?;
    }
    Ok(String::from_utf8(out).expect("csv output is UTF-8"))
}

pub fn write_csv(table: &Table, meta: &Metadata, path: &Path) -> Result<()> {
    let text = to_csv_string(table, meta)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a file produced by [`write_csv`]; numeric-looking cells come back
/// as floats, everything else as text.
pub fn read_csv(path: &Path) -> Result<(Metadata, Table)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<(Metadata, Table)> {
    let mut meta = Metadata::default();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line[1..].split_once('=') {
            meta.entries.push((k.trim().into(), v.trim().into()));
        }
    }
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let fail = |e: csv::Error| Error::invalid("csv", e.to_string());
    let columns: Vec<String> = r
        .headers()
        .map_err(fail)?
        .iter()
        .map(String::from)
        .collect();
    let mut table = Table::new(columns);
    for rec in r.records() {
        let rec = rec.map_err(fail)?;
        let row = rec
            .iter()
            .map(|cell| match cell.parse::<f64>() {
                Ok(x) if !cell.is_empty() => Value::Float(x),
                _ => Value::Text(cell.to_string()),
            })
            .collect();
        table.rows.push(row);
    }
    Ok((meta, table))
}
