//! CSV tables, JSON sidecars and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(w.into_inner()?)
    }
}

/// Writes files into one directory and remembers their checksums.
pub struct OutputDir {
    dir: PathBuf,
    checksums: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutputDir { dir: dir.to_path_buf(), checksums: BTreeMap::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.checksums.insert(name.to_string(), format!("{:x}", Sha256::digest(bytes)));
        Ok(())
    }

    pub fn finish<C: Serialize>(mut self, manifest: Manifest<C>) -> Result<PathBuf> {
        let manifest = Manifest { outputs: std::mem::take(&mut self.checksums), ..manifest };
        self.write("manifest.json", &json_bytes(&manifest)?)?;
        Ok(self.dir.join("manifest.json"))
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Everything needed to reproduce a run's outputs.
#[derive(Debug, Serialize)]
pub struct Manifest<C> {
    pub tool: &'static str,
    pub version: &'static str,
    /// Arguments after the program name, without `--threads` and `--out`.
    pub command: Vec<String>,
    pub seed: Option<u64>,
    pub config: C,
    pub outputs: BTreeMap<String, String>,
}

impl<C> Manifest<C> {
    pub fn new(command: Vec<String>, seed: Option<u64>, config: C) -> Self {
        Manifest {
            tool: "tiltlab",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            outputs: BTreeMap::new(),
        }
    }
}

/// Drops flags that do not affect results (`--threads`, `--out`) and their values.
pub fn reproducible_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--threads" || a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--threads=") || a.starts_with("--out=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}
