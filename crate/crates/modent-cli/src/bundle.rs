//! Artifact writing.
//!
//! Every emitted file is recorded with its byte count and SHA-256 content
//! hash in `manifest.json`, written last. The manifest is only marked
//! complete when the whole run succeeded, so a half-written bundle is
//! always recognizable.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Serialize)]
struct FileRecord {
    name: String,
    bytes: usize,
    sha256: String,
}

pub struct OutputBundle {
    command: String,
    out_dir: PathBuf,
    seed: u64,
    config_echo: serde_json::Value,
    files: Vec<FileRecord>,
    timings_ms: Vec<(String, u128)>,
    started: Instant,
}

impl OutputBundle {
    pub fn new(
        command: &str,
        out_dir: PathBuf,
        config_echo: serde_json::Value,
        seed: u64,
    ) -> Result<Self, CliError> {
        fs::create_dir_all(&out_dir)?;
        Ok(OutputBundle {
            command: command.to_string(),
            out_dir,
            seed,
            config_echo,
            files: Vec::new(),
            timings_ms: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn write_text(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents)?;
        let digest = Sha256::digest(contents.as_bytes());
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.files.push(FileRecord {
            name: name.to_string(),
            bytes: contents.len(),
            sha256,
        });
        log::info!("wrote {}", path.display());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Records the elapsed time since `since` under `label`.
    pub fn timing(&mut self, label: &str, since: Instant) {
        self.timings_ms
            .push((label.to_string(), since.elapsed().as_millis()));
    }

    /// Writes the manifest and consumes the bundle. `complete` must only
    /// be true when every requested artifact was produced.
    pub fn finish(mut self, complete: bool) -> Result<PathBuf, CliError> {
        self.timings_ms
            .push(("total".to_string(), self.started.elapsed().as_millis()));
        let timings: serde_json::Map<String, serde_json::Value> = self
            .timings_ms
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect();
        let manifest = serde_json::json!({
            "command": self.command,
            "complete": complete,
            "seed": self.seed,
            "versions": { "modent": env!("CARGO_PKG_VERSION") },
            "config": self.config_echo,
            "files": self.files,
            "timings_ms": timings,
        });
        let path = self.out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// CSV cell formatting: 17 significant digits, `.` decimal separator,
/// infinities spelled out so tables round-trip.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:.16e}")
    }
}
