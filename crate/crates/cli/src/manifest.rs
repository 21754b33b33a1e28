use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TOOL: &str = "chrono-embed";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Record of one command invocation, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name; `rerun` replays them.
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
    pub warnings: Vec<String>,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::data(format!("{} is not a run manifest: {e}", path.display())))
    }

    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut f = fs::File::open(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f
            .read(&mut buf)
            .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn unix(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Collects what a command read, wrote and warned about.
pub(crate) struct Run {
    command: String,
    argv: Vec<String>,
    config: serde_json::Value,
    inputs: Vec<InputHash>,
    outputs: Vec<PathBuf>,
    warnings: Vec<String>,
    started: SystemTime,
    clock: Instant,
}

impl Run {
    pub fn new(command: &str, argv: &[String], config: serde_json::Value) -> Self {
        Run {
            command: command.to_owned(),
            argv: argv.to_vec(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_owned());
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        log::warn!("{message}");
        self.warnings.push(message);
    }

    /// Writes the manifest into `dir` if that directory exists.
    pub fn finish(self, dir: &Path, result: &Result<(), CliError>) -> Result<(), CliError> {
        if !dir.is_dir() {
            return Ok(());
        }
        let finished = SystemTime::now();
        let manifest = RunManifest {
            tool: TOOL.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: self.command.clone(),
            argv: self.argv,
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
            started_unix: unix(self.started),
            finished_unix: unix(finished),
            wall_seconds: self.clock.elapsed().as_secs_f64(),
            warnings: self.warnings,
            status: if result.is_ok() { "ok" } else { "error" }.to_owned(),
            error: result.as_ref().err().map(ToString::to_string),
        };
        let path = dir.join(RunManifest::file_name(&self.command));
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        fs::write(&path, json).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
    }
}
