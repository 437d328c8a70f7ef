//! CSV and JSON writers, checksums and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Result;

/// Column-oriented CSV table. Values are written in scientific notation
/// with 17 significant digits; `None` and non-finite values become empty
/// fields.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl CsvTable {
    /// Column names, conventionally with a unit suffix such as `t_s`.
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn push_values(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| Some(*v)).collect());
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Some(x) if x.is_finite() => format!("{x:.16e}"),
                    _ => String::new(),
                })
                .collect();
            s.push_str(&fields.join(","));
            s.push('\n');
        }
        s
    }
}

/// Checksum and size of one emitted file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Writes files into one run directory and remembers their checksums.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write_bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        fs::write(self.root.join(name), data)?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileRecord { name: name.to_string(), sha256: sha256_hex(data), bytes: data.len() as u64 });
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, table: &CsvTable) -> Result<()> {
        self.write_bytes(name, table.render().as_bytes())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write_bytes(name, s.as_bytes())
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }
}

/// Provenance of one run, written as `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub kind: String,
    pub config_sha256: String,
    pub code_version: String,
    pub wall_time_s: f64,
    pub status: String,
    pub files: Vec<FileRecord>,
}
