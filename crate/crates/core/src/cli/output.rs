//! CSV tables and the run manifest.
//!
//! Floats are written with the shortest decimal that parses back to the
//! same double, so every table round-trips bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::config::Job;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<usize>> for Cell {
    fn from(v: Option<usize>) -> Self {
        match v {
            Some(k) => Cell::Int(k as u64),
            None => Cell::Text(String::new()),
        }
    }
}

/// Shortest round-trip decimal. Plain notation in the everyday range,
/// exponent notation outside it.
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !v.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(v) => format_real(*v),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Splits a complex value into its `re`/`im` cells.
pub fn complex_cells(z: Complex64) -> [Cell; 2] {
    [Cell::Real(z.re), Cell::Real(z.im)]
}

/// Parses a CSV produced by [`Table::to_csv`] into its header and the raw
/// fields of each row.
pub fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .map(|h| h.split(',').map(str::to_string).collect())
        .unwrap_or_default();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: Job,
    pub seed: Option<u64>,
    pub started: String,
    pub finished: String,
    /// SHA-256 of each emitted table, keyed by file name.
    pub files: BTreeMap<String, String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.partial"));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Writes every table, then the manifest. On any failure the files already
/// written by this call are removed.
pub fn write_tables(
    dir: &Path,
    tables: &[Table],
    mut manifest: RunManifest,
) -> Result<RunManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let outcome = (|| {
        for t in tables {
            let path = dir.join(&t.name);
            let bytes = t.to_csv().into_bytes();
            write_atomic(&path, &bytes)?;
            written.push(path);
            manifest.files.insert(t.name.clone(), sha256_hex(&bytes));
        }
        manifest.finished = chrono::Utc::now().to_rfc3339();
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = dir.join(MANIFEST_NAME);
        write_atomic(&path, json.as_bytes())?;
        written.push(path);
        Ok(())
    })();
    if let Err(e) = outcome {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        return Err(e);
    }
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::config("manifest", e.to_string()))
}

/// Names of files whose current contents no longer match the manifest.
pub fn verify_checksums(dir: &Path, manifest: &RunManifest) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for (name, sum) in &manifest.files {
        let path = dir.join(name);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if &sha256_hex(&bytes) != sum {
            bad.push(name.clone());
        }
    }
    Ok(bad)
}
