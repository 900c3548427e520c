use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Result;

/// One output file, kept in memory until the run succeeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
        bytes.push(b'\n');
        Self {
            name: name.into(),
            bytes,
        }
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

/// Formats a float with 17 significant digits, independent of locale.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV builder; cells are written verbatim, so callers keep them free of
/// commas.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "csv row width");
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_artifact(self, name: &str) -> Artifact {
        Artifact {
            name: name.into(),
            bytes: self.text.into_bytes(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Writes the artifacts and a manifest listing each with its hash.
pub fn write_all(dir: &Path, artifacts: &[Artifact], schema_version: u32, experiment: &str, seed: u64) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.bytes)?;
        files.push(ManifestEntry {
            path: a.name.clone(),
            sha256: a.sha256(),
            bytes: a.bytes.len(),
        });
    }
    let manifest = Manifest {
        schema_version,
        experiment: experiment.into(),
        seed,
        files,
    };
    let m = Artifact::json(MANIFEST_NAME, &manifest);
    fs::write(dir.join(MANIFEST_NAME), &m.bytes)?;
    Ok(manifest)
}
