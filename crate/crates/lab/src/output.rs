//! Output directory bookkeeping, CSV and PGM writers, and the manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{LabError, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct ResultManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub files: &'a [FileEntry],
    pub wall_clock_seconds: f64,
}

pub const MANIFEST: &str = "manifest.json";

/// A writable output directory that remembers every file written to it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    /// Creates the directory and proves it is writable.
    pub fn create(root: &Path) -> Result<Self> {
        let fail = |source| LabError::Output {
            path: root.to_path_buf(),
            source,
        };
        fs::create_dir_all(root).map_err(fail)?;
        let probe = root.join(".ptide-write-probe");
        fs::write(&probe, b"").map_err(fail)?;
        fs::remove_file(&probe).map_err(fail)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| LabError::io(&path, e))?;
        let entry = FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        };
        match self.files.iter_mut().find(|f| f.path == name) {
            Some(old) => *old = entry,
            None => self.files.push(entry),
        }
        Ok(path)
    }

    pub fn write_csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| LabError::io(name, std::io::Error::other(e));
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::io(name, e.into_error()))?;
        self.write_bytes(name, &bytes)
    }

    /// Binary PGM (P5). `cells` is row-major, one byte per pixel.
    pub fn write_pgm(&mut self, name: &str, width: usize, height: usize, cells: &[u8]) -> Result<PathBuf> {
        let mut out = Vec::with_capacity(cells.len() + 20);
        write!(out, "P5\n{width} {height}\n255\n").expect("write to Vec");
        out.extend_from_slice(cells);
        self.write_bytes(name, &out)
    }

    /// Writes `manifest.json`. Call after every other file.
    pub fn finish(self, config: &RunConfig, elapsed: Duration) -> Result<Vec<FileEntry>> {
        let manifest = ResultManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config,
            files: &self.files,
            wall_clock_seconds: elapsed.as_secs_f64(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.root.join(MANIFEST);
        fs::write(&path, text).map_err(|e| LabError::io(&path, e))?;
        Ok(self.files)
    }
}

/// SHA-256 of a file on disk, hex encoded.
pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| LabError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }
}
