use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nbvsynth_core::image::{DepthMap, HoleMask, RgbImage};
use nbvsynth_core::pointcloud::ply::write_ply;
use nbvsynth_core::ColoredPointCloud;

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Everything needed to re-run a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, as given.
    pub argv: Vec<String>,
    /// Directory relative paths in `argv` resolve against.
    pub cwd: PathBuf,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    /// Input path → SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output path relative to the output directory → SHA-256.
    pub outputs: BTreeMap<String, String>,
    /// Output files grouped by step, e.g. `left/step0`.
    pub artifacts: BTreeMap<String, Vec<String>>,
    pub timings: Vec<StageTiming>,
    pub status: RunStatus,
    pub error: Option<String>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}

/// Tracks a command's inputs, outputs and stage timings as it runs.
pub struct Run {
    command: String,
    argv: Vec<String>,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    artifacts: BTreeMap<String, Vec<String>>,
    timings: Vec<StageTiming>,
    out_dir: Option<PathBuf>,
}

impl Run {
    pub fn new(command: &str, argv: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            argv,
            seed: None,
            config: serde_json::Value::Null,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            artifacts: BTreeMap::new(),
            timings: Vec::new(),
            out_dir: None,
        }
    }

    /// Creates the output directory. Call only after inputs are validated.
    pub fn open_output(&mut self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        self.out_dir = Some(dir.to_path_buf());
        Ok(())
    }

    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path)
            .map_err(|e| CliError::Validation(format!("cannot read input {}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = f(self);
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let root = self
            .out_dir
            .as_ref()
            .ok_or_else(|| CliError::Internal("output directory not opened".into()))?;
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.outputs.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        s.push('\n');
        self.write(rel, s.as_bytes())
    }

    pub fn write_png(&mut self, rel: &str, img: &RgbImage) -> Result<(), CliError> {
        let bytes = img.encode_png()?;
        self.write(rel, &bytes)
    }

    pub fn write_mask(&mut self, rel: &str, mask: &HoleMask) -> Result<(), CliError> {
        let bytes = mask.encode_png()?;
        self.write(rel, &bytes)
    }

    pub fn write_pfm(&mut self, rel: &str, depth: &DepthMap) -> Result<(), CliError> {
        self.write(rel, &depth.encode_pfm())
    }

    pub fn write_ply(&mut self, rel: &str, cloud: &ColoredPointCloud) -> Result<(), CliError> {
        let mut bytes = Vec::new();
        write_ply(cloud, &mut bytes)?;
        self.write(rel, &bytes)
    }

    pub fn group(&mut self, name: &str, files: Vec<String>) {
        self.artifacts.insert(name.to_string(), files);
    }

    /// Writes `manifest.json` into the output directory, if one was opened.
    pub fn finish(self, error: Option<&CliError>) -> Result<Option<RunManifest>, CliError> {
        let Some(dir) = self.out_dir.clone() else {
            return Ok(None);
        };
        let cwd = std::env::current_dir().map_err(|e| CliError::Internal(e.to_string()))?;
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            argv: self.argv,
            cwd,
            seed: self.seed,
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs,
            artifacts: self.artifacts,
            timings: self.timings,
            status: if error.is_some() { RunStatus::Failed } else { RunStatus::Complete },
            error: error.map(|e| e.to_string()),
        };
        let path = dir.join(MANIFEST_FILE);
        let mut s = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        s.push('\n');
        fs::write(&path, s).map_err(|e| CliError::io(&path, e))?;
        Ok(Some(manifest))
    }
}
