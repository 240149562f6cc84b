//! In-memory result bundle and its on-disk layout.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// One CSV table: a header row and records of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> std::io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }
}

/// Shortest round-trip representation of a float, with `-0.0` written as `0.0`.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    /// SHA-256 of the configuration file bytes.
    pub config_sha256: String,
    pub tables: Vec<String>,
    pub reports: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ResultBundle {
    pub experiment: String,
    pub seed: u64,
    pub config_sha256: String,
    pub tables: BTreeMap<String, Table>,
    pub reports: BTreeMap<String, Value>,
}

pub fn config_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug)]
pub struct EmitError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

impl std::fmt::Display for EmitError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "cannot write {}: {}", self.path.display(), self.source)
    }
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf, EmitError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| EmitError { path: parent.to_path_buf(), source })?;
    }
    fs::write(&path, bytes).map_err(|source| EmitError { path: path.clone(), source })?;
    Ok(path)
}

fn pretty_json(value: &impl Serialize) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("bundle values serialize");
    bytes.push(b'\n');
    bytes
}

impl ResultBundle {
    pub fn new(experiment: &str, seed: u64, config_bytes: &[u8]) -> Self {
        Self { experiment: experiment.to_string(), seed, config_sha256: config_hash(config_bytes), ..Default::default() }
    }

    pub fn add_table(&mut self, name: impl Into<String>, table: Table) {
        self.tables.insert(name.into(), table);
    }

    pub fn add_report(&mut self, name: impl Into<String>, report: &impl Serialize) {
        let value = serde_json::to_value(report).expect("reports serialize");
        self.reports.insert(name.into(), value);
    }

    pub fn manifest(&self) -> Manifest {
        let mut tables: Vec<String> = self.tables.keys().map(|k| format!("tables/{k}.csv")).collect();
        if !self.tables.is_empty() {
            tables.push("tables/schema.json".into());
        }
        Manifest {
            tool: "chernlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment: self.experiment.clone(),
            seed: self.seed,
            config_sha256: self.config_sha256.clone(),
            tables,
            reports: self.reports.keys().map(|k| format!("reports/{k}.json")).collect(),
        }
    }

    /// Writes `manifest.json`, `tables/*.csv` with `tables/schema.json`, and
    /// `reports/*.json` under `dir`. Returns the written paths in layout order.
    pub fn emit(&self, dir: &Path) -> Result<Vec<PathBuf>, EmitError> {
        let mut paths = vec![write(dir.join("manifest.json"), &pretty_json(&self.manifest()))?];
        if !self.tables.is_empty() {
            let schema: BTreeMap<&str, &[String]> =
                self.tables.iter().map(|(k, t)| (k.as_str(), t.columns.as_slice())).collect();
            paths.push(write(dir.join("tables/schema.json"), &pretty_json(&schema))?);
        }
        for (name, table) in &self.tables {
            let path = dir.join(format!("tables/{name}.csv"));
            let bytes = table.to_csv().map_err(|source| EmitError { path: path.clone(), source })?;
            paths.push(write(path, &bytes)?);
        }
        for (name, report) in &self.reports {
            paths.push(write(dir.join(format!("reports/{name}.json")), &pretty_json(report))?);
        }
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_bundle_writes_manifest_only() {
        let dir = tempfile::tempdir().unwrap();
        let bundle = ResultBundle::new("marker", 0, b"");
        assert!(bundle.tables.is_empty() && bundle.reports.is_empty());
        let paths = bundle.emit(dir.path()).unwrap();
        assert_eq!(paths, vec![dir.path().join("manifest.json")]);
        let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn emitting_twice_is_byte_identical() {
        let mut b = ResultBundle::new("marker", 7, b"seed = 7");
        let mut t = Table::new(&["L", "t_L"]);
        t.push(vec![num(3.0), num(0.1 + 0.2)]);
        b.add_table("tuv_sequence", t);
        b.add_report("summary", &serde_json::json!({"marker": 0.25}));
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let p1 = b.emit(d1.path()).unwrap();
        let p2 = b.emit(d2.path()).unwrap();
        assert_eq!(p1.len(), 4);
        for (a, c) in p1.iter().zip(&p2) {
            assert_eq!(fs::read(a).unwrap(), fs::read(c).unwrap());
        }
        let csv = fs::read_to_string(d1.path().join("tables/tuv_sequence.csv")).unwrap();
        assert_eq!(csv, "L,t_L\n3.0,0.30000000000000004\n");
    }

    #[test]
    fn hash_is_sha256_of_bytes() {
        assert_eq!(config_hash(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
