//! Run manifests: the resolved invocation plus content hashes of every input and output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::commands::Invocation;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileHash {
    pub fn of(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Ok(FileHash {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub invocation: Invocation,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Hashes a file, or every file of a directory in name order.
pub fn hash_path(path: &Path) -> Result<Vec<FileHash>> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        entries.retain(|p| p.is_file() && p.file_name().is_some_and(|n| n != "manifest.json"));
        entries.sort();
        entries.iter().map(FileHash::of).collect()
    } else {
        Ok(vec![FileHash::of(path)?])
    }
}

impl Manifest {
    pub fn new(invocation: Invocation, inputs: &[PathBuf], outputs: &[PathBuf]) -> Result<Self> {
        let hash_all = |paths: &[PathBuf]| -> Result<Vec<FileHash>> {
            Ok(paths.iter().map(|p| hash_path(p)).collect::<Result<Vec<_>>>()?.concat())
        };
        Ok(Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            invocation,
            inputs: hash_all(inputs)?,
            outputs: hash_all(outputs)?,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("bad manifest: {e}")))
    }

    /// Lists outputs whose current hash differs from the recorded one.
    pub fn mismatched_outputs(&self) -> Result<Vec<PathBuf>> {
        let mut bad = Vec::new();
        for f in &self.outputs {
            if sha256_file(&f.path)? != f.sha256 {
                bad.push(f.path.clone());
            }
        }
        Ok(bad)
    }

    pub fn check_inputs(&self) -> Result<()> {
        for f in &self.inputs {
            if sha256_file(&f.path)? != f.sha256 {
                return Err(Error::validation(format!("input {} changed since the manifest was written", f.path.display())));
            }
        }
        Ok(())
    }
}
