use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{config_hash, sha256_hex};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to regenerate a run's artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    /// Fully resolved configuration; `replay` runs from this alone.
    pub config: Value,
    pub inputs: Vec<FileDigest>,
    /// Artifact names relative to the output directory.
    pub artifacts: Vec<FileDigest>,
    pub partial: bool,
}

fn digest(path: &Path, shown: String) -> anyhow::Result<FileDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileDigest {
        path: shown,
        sha256: sha256_hex(&bytes),
    })
}

/// Collects outputs of one command run.
pub struct Run {
    pub out_dir: PathBuf,
    command: String,
    config: Value,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    artifacts: Vec<String>,
}

impl Run {
    pub fn new(out_dir: &Path, command: &str, config: Value, seed: Option<u64>) -> anyhow::Result<Self> {
        fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            config,
            seed,
            inputs: Vec::new(),
            artifacts: Vec::new(),
        })
    }

    pub fn input(&mut self, path: &Path) {
        if !self.inputs.iter().any(|p| p == path) {
            self.inputs.push(path.to_path_buf());
        }
    }

    /// Path for a new artifact, registered for the manifest.
    pub fn artifact(&mut self, name: &str) -> PathBuf {
        if !self.artifacts.iter().any(|a| a == name) {
            self.artifacts.push(name.to_string());
        }
        self.out_dir.join(name)
    }

    pub fn create(&mut self, name: &str) -> anyhow::Result<fs::File> {
        let path = self.artifact(name);
        fs::File::create(&path).with_context(|| format!("creating {}", path.display()))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        let path = self.artifact(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn finish(self, partial: bool) -> anyhow::Result<Manifest> {
        let inputs = self
            .inputs
            .iter()
            .map(|p| digest(p, p.display().to_string()))
            .collect::<anyhow::Result<_>>()?;
        let artifacts = self
            .artifacts
            .iter()
            .map(|a| digest(&self.out_dir.join(a), a.clone()))
            .collect::<anyhow::Result<_>>()?;
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(&self.command, &self.config)?,
            command: self.command,
            seed: self.seed,
            config: self.config,
            inputs,
            artifacts,
            partial,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.out_dir.join(MANIFEST_FILE), text)?;
        Ok(manifest)
    }
}

pub fn read(path: &Path) -> anyhow::Result<Manifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
}
