//! Series files, checksums and the run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use dfl_core::TimeSeries;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub label: String,
    pub rows: usize,
    pub sha256: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Configuration after command-line overrides.
    pub config: RunConfig,
    pub code_version: String,
    pub generator: String,
    pub qubit_budget: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputFile>,
    /// Scalar results that are not time series.
    #[serde(default)]
    pub summary: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row<'a> {
    time: f64,
    value: f64,
    stderr: f64,
    label: &'a str,
}

#[derive(Debug, Deserialize)]
struct OwnedRow {
    time: f64,
    value: f64,
    stderr: f64,
    label: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Writes `bytes` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn series_to_csv(series: &TimeSeries) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for i in 0..series.len() {
        w.serialize(Row {
            time: series.times[i],
            value: series.values[i],
            stderr: series.stderr[i],
            label: &series.label,
        })
        .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    }
    w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
}

/// Reads a series file written by [`series_to_csv`].
pub fn read_series(path: &Path) -> Result<TimeSeries, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let (mut t, mut v, mut e, mut label) = (vec![], vec![], vec![], None);
    for row in r.deserialize::<OwnedRow>() {
        let row = row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        t.push(row.time);
        v.push(row.value);
        e.push(row.stderr);
        label.get_or_insert(row.label);
    }
    Ok(TimeSeries::new(label.unwrap_or_default(), t, v, e)?)
}

/// Collects series files in an output directory.
pub struct OutputWriter {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputWriter {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputWriter {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, series: &TimeSeries) -> Result<(), CliError> {
        let file = format!("{}.csv", series.label);
        if self.files.iter().any(|f| f.file == file) {
            return Err(CliError::Config(format!("two series named '{}'", series.label)));
        }
        let bytes = series_to_csv(series)?;
        write_atomic(&self.dir.join(&file), &bytes)?;
        self.files.push(OutputFile {
            file,
            label: series.label.clone(),
            rows: series.len(),
            sha256: sha256_hex(&bytes),
            metadata: series.metadata.clone(),
        });
        Ok(())
    }

    pub fn finish(self) -> Vec<OutputFile> {
        self.files
    }
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let json = serde_json::to_vec_pretty(manifest).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    write_atomic(&dir.join(MANIFEST_FILE), &json)
}
