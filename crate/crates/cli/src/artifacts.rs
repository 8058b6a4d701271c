//! Output files of a run. Every file goes through one writer, which writes a
//! temp file next to the target and renames it into place, and records the
//! checksum for the manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `data` to `path` via a sibling temp file and a rename, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, data: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let name = path.file_name().ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(data)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

pub struct ArtifactWriter {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(ArtifactWriter { dir, artifacts: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, data)?;
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact { path: name.to_string(), sha256: sha256_hex(data), bytes: data.len() });
        Ok(path)
    }

    /// Buffers whatever `fill` writes, then stores it as `name`.
    pub fn write_with<F>(&mut self, name: &str, fill: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
    {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    /// Writes `manifest.json`: tool, version, subcommand, seed, the resolved
    /// config, the artifacts with checksums and a command-specific summary.
    /// No timestamps, so a rerun yields the same bytes.
    pub fn finish(
        mut self,
        subcommand: &str,
        cfg: &RunConfig,
        summary: serde_json::Value,
    ) -> Result<PathBuf, CliError> {
        let artifacts: Vec<serde_json::Value> = self
            .artifacts
            .iter()
            .map(|a| serde_json::json!({ "path": a.path, "sha256": a.sha256, "bytes": a.bytes }))
            .collect();
        let doc = serde_json::json!({
            "tool": "stochmls",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": subcommand,
            "master_seed": cfg.seed(),
            "config": cfg.to_json(),
            "artifacts": artifacts,
            "summary": summary,
        });
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        let path = self.dir.join(MANIFEST);
        write_atomic(&path, text.as_bytes())?;
        self.artifacts.clear();
        Ok(path)
    }
}
