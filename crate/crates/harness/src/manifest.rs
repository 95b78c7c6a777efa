//! Run manifests and output helpers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub cell: u64,
    pub chain: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub wall_clock_ns: u64,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub software_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub config: serde_json::Value,
    pub seeds: Vec<SeedRecord>,
    pub runs: Vec<RunRecord>,
    /// Paths relative to the output directory, manifest included.
    pub files: Vec<String>,
}

pub fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: timestamp(),
            finished_at: String::new(),
            config: serde_json::to_value(config)?,
            seeds: Vec::new(),
            runs: Vec::new(),
            files: Vec::new(),
        })
    }

    pub fn all_ok(&self) -> bool {
        self.runs.iter().all(|r| r.ok)
    }

    /// Stamps the finish time, lists the manifest itself and writes it.
    pub fn finish(mut self, out: &OutputDir) -> Result<Self> {
        self.finished_at = timestamp();
        self.files.push(MANIFEST_FILE.to_string());
        let text = serde_json::to_string_pretty(&self)?;
        out.write_raw(MANIFEST_FILE, text.as_bytes())?;
        Ok(self)
    }
}

/// Output directory that records every file written through it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|source| HarnessError::Write {
            path: root.clone(),
            source,
        })?;
        Ok(Self { root })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    fn write_raw(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        let mut f = fs::File::create(&path).map_err(|source| HarnessError::Write {
            path: path.clone(),
            source,
        })?;
        f.write_all(bytes)
            .map_err(|source| HarnessError::Write { path, source })
    }

    /// Writes `name` and records it in `manifest`.
    pub fn write(&self, manifest: &mut RunManifest, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        self.write_raw(name, bytes)?;
        if !manifest.files.iter().any(|f| f == name) {
            manifest.files.push(name.to_string());
        }
        Ok(self.root.join(name))
    }

    pub fn write_json<T: Serialize>(&self, manifest: &mut RunManifest, name: &str, value: &T) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value)?;
        self.write(manifest, name, text.as_bytes())
    }
}
