use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileKind {
    Csv,
    Json,
    Toml,
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: PathBuf,
    pub kind: FileKind,
    pub bytes: u64,
    pub sha256: String,
    pub stage: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub seconds: f64,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub stages: Vec<StageRecord>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn new(config_hash: String) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            stages: Vec::new(),
            files: Vec::new(),
        }
    }

    /// The manifest in `dir` when it belongs to the same config, else a new one.
    pub fn load_or_new(dir: &Path, config_hash: &str) -> Self {
        fs::read_to_string(dir.join(MANIFEST_NAME))
            .ok()
            .and_then(|t| serde_json::from_str::<RunManifest>(&t).ok())
            .filter(|m| m.config_hash == config_hash)
            .unwrap_or_else(|| Self::new(config_hash.to_string()))
    }

    pub fn record_file(
        &mut self,
        dir: &Path,
        rel: &Path,
        kind: FileKind,
        stage: &str,
    ) -> io::Result<()> {
        let data = fs::read(dir.join(rel))?;
        let entry = FileEntry {
            path: rel.to_path_buf(),
            kind,
            bytes: data.len() as u64,
            sha256: hex::encode(Sha256::digest(&data)),
            stage: stage.to_string(),
        };
        match self.files.iter_mut().find(|f| f.path == rel) {
            Some(f) => *f = entry,
            None => self.files.push(entry),
        }
        Ok(())
    }

    pub fn record_stage(&mut self, name: &str, seconds: f64, passed: bool, note: Option<String>) {
        self.stages.push(StageRecord {
            name: name.to_string(),
            seconds,
            passed,
            note,
        });
    }

    pub fn save(&self, dir: &Path) -> io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(dir.join(MANIFEST_NAME), text + "\n")
    }

    /// Problems with the listed files: missing, changed, or not parseable.
    pub fn audit(&self, dir: &Path) -> Vec<String> {
        let mut out = Vec::new();
        for f in &self.files {
            let full = dir.join(&f.path);
            let Ok(data) = fs::read(&full) else {
                out.push(format!("{}: missing", f.path.display()));
                continue;
            };
            if hex::encode(Sha256::digest(&data)) != f.sha256 {
                out.push(format!(
                    "{}: contents changed since the run",
                    f.path.display()
                ));
            }
            if let Err(e) = check_parses(f.kind, &data) {
                out.push(format!("{}: {e}", f.path.display()));
            }
        }
        out
    }
}

fn check_parses(kind: FileKind, data: &[u8]) -> Result<(), String> {
    match kind {
        FileKind::Binary => Ok(()),
        FileKind::Json => serde_json::from_slice::<serde_json::Value>(data)
            .map(|_| ())
            .map_err(|e| e.to_string()),
        FileKind::Toml => std::str::from_utf8(data)
            .map_err(|e| e.to_string())
            .and_then(|t| toml::from_str::<toml::Table>(t).map_err(|e| e.to_string()))
            .map(|_| ()),
        FileKind::Csv => {
            let text = std::str::from_utf8(data).map_err(|e| e.to_string())?;
            if text.contains('\r') {
                return Err("CRLF line ending".into());
            }
            let mut lines = text.lines();
            let header = lines.next().ok_or("empty CSV")?;
            let width = header.split(',').count();
            for (i, l) in lines.enumerate() {
                if l.split(',').count() != width {
                    return Err(format!("row {} has the wrong number of fields", i + 1));
                }
            }
            Ok(())
        }
    }
}
