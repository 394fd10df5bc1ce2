//! Deterministic result emission: CSV tables plus a JSON manifest.
//!
//! Floats are rendered with Rust's shortest-roundtrip `Display`, so a value
//! re-read from the CSV is bit-identical to the one computed — and two runs
//! of the same spec emit byte-identical files. The manifest echoes the full
//! spec and carries a content hash of the results computed the way git hashes
//! a blob (`sha256("blob <len>\0" ‖ bytes)`), so any tampering with the CSV
//! is detectable without re-running the experiment.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentSpec;

/// An in-memory result table: a header and stringified rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row; the cell count must match the header.
    pub fn push(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len(), "row width mismatch");
        self.rows.push(cells);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Column index by name; panics on unknown names (a driver bug).
    pub fn column(&self, name: &str) -> usize {
        self.columns
            .iter()
            .position(|c| c == name)
            .unwrap_or_else(|| panic!("no column '{name}'"))
    }

    /// Parses one cell as f64 ("inf" and "NaN" included, per Rust's parser).
    pub fn cell_f64(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.column(name)].parse().expect("numeric cell")
    }

    pub fn cell(&self, row: usize, name: &str) -> &str {
        &self.rows[row][self.column(name)]
    }

    /// UTF-8 CSV bytes: header row then data rows.
    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Shortest-roundtrip decimal rendering (what `Display` does for f64).
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Git-style content hash of a byte string: SHA-256 over
/// `"blob <len>\0"` followed by the bytes, lowercase hex.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    let digest = h.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

/// Machine-readable run record written next to every CSV.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub experiment: &'a str,
    pub spec: &'a ExperimentSpec,
    pub results: String,
    pub rows: usize,
    pub content_hash: String,
    /// Driver-specific summary values (fitted exponents, failure counts, …).
    pub extra: serde_json::Value,
}

/// Writes `table` as CSV at `csv_path` and the manifest next to it
/// (`<stem>.manifest.json`). Returns the manifest path.
pub fn write_outputs(
    csv_path: &Path,
    table: &Table,
    spec: &ExperimentSpec,
    extra: serde_json::Value,
) -> Result<PathBuf> {
    let bytes = table.to_csv_bytes();
    if let Some(dir) = csv_path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    std::fs::write(csv_path, &bytes)
        .with_context(|| format!("writing {}", csv_path.display()))?;

    let manifest = Manifest {
        experiment: &spec.experiment,
        spec,
        results: csv_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        rows: table.len(),
        content_hash: content_hash(&bytes),
        extra,
    };
    let manifest_path = csv_path.with_extension("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&manifest_path, text)
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    Ok(manifest_path)
}
