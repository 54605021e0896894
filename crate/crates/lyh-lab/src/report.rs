//! CSV tables with provenance columns and the JSON run manifest.

use serde::Serialize;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Name of the counter-based generator behind every random draw.
pub const RNG_ALGORITHM: &str = "ChaCha20";

/// Columns prepended to every row.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub version: &'static str,
    pub tol: f64,
}

impl Provenance {
    fn cells(&self) -> [String; 3] {
        [self.seed.to_string(), self.version.to_string(), fmt_f64(self.tol)]
    }
}

/// Shortest round-trip decimal form, so equal floats always print equally.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// An in-memory CSV table; rows are written in insertion order.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        let mut header: Vec<String> = ["seed", "version", "tol"].iter().map(|s| s.to_string()).collect();
        header.extend(columns.iter().map(|s| s.to_string()));
        Self { name: name.to_string(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, prov: &Provenance, cells: Vec<String>) {
        assert_eq!(cells.len() + 3, self.header.len(), "row width for {}", self.name);
        let mut row: Vec<String> = prov.cells().to_vec();
        row.extend(cells);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, dir: &Path, stamp: Option<u64>) -> io::Result<PathBuf> {
        let path = dir.join(format!("{}.csv", self.name));
        let mut buf = Vec::new();
        if let Some(s) = stamp {
            buf.extend_from_slice(format!("# generated_unix={s}\n").as_bytes());
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        fs::write(&path, buf)?;
        Ok(path)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub exit_code: i32,
    pub assertions: usize,
    pub failures: Vec<String>,
    pub inconclusive: usize,
    pub inconclusive_quota: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub suite: &'a str,
    pub version: &'static str,
    pub rng: &'static str,
    pub seed: u64,
    /// Per-cell seeds, in row order.
    pub cell_seeds: &'a [u64],
    pub jobs: Option<usize>,
    pub config: &'a C,
    pub outputs: Vec<String>,
    pub outcome: &'a Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
}

impl<C: Serialize> Manifest<'_, C> {
    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut s = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        s.push('\n');
        fs::write(&path, s)?;
        Ok(path)
    }
}

/// Lines of a CSV file with `#` comment lines removed.
pub fn csv_body(text: &str) -> String {
    text.split_inclusive('\n').filter(|l| !l.starts_with('#')).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_carry_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("demo", &["x"]);
        let prov = Provenance { seed: 9, version: "0.1.0", tol: 1e-8 };
        t.push(&prov, vec![fmt_f64(0.1)]);
        let p = t.write(dir.path(), None).unwrap();
        assert_eq!(fs::read_to_string(p).unwrap(), "seed,version,tol,x\n9,0.1.0,0.00000001,0.1\n");
        let p = t.write(dir.path(), Some(5)).unwrap();
        let text = fs::read_to_string(p).unwrap();
        assert!(text.starts_with("# generated_unix=5\n"));
        assert_eq!(csv_body(&text), "seed,version,tol,x\n9,0.1.0,0.00000001,0.1\n");
    }
}
