use std::fs;
use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run: command line, seed, config text and output hashes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub master_seed: u64,
    pub threads: Option<usize>,
    pub config_sha256: Option<String>,
    pub config_toml: Option<String>,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    /// Hashes every regular file in `out` except the manifest itself.
    pub fn new(command: &str, args: Vec<String>, seed: u64, threads: Option<usize>, config: Option<String>, out: &Path) -> Result<Self> {
        let mut outputs = Vec::new();
        for entry in fs::read_dir(out)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if entry.file_type()?.is_file() && name != MANIFEST_FILE {
                outputs.push(OutputEntry { sha256: sha256_hex(&fs::read(entry.path())?), file: name });
            }
        }
        outputs.sort_by(|a, b| a.file.cmp(&b.file));
        Ok(Self {
            tool: "stochavg".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args,
            master_seed: seed,
            threads,
            config_sha256: config.as_ref().map(|c| sha256_hex(c.as_bytes())),
            config_toml: config,
            outputs,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn round_trip_and_hashes() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.csv"), "x\n").unwrap();
        fs::write(dir.path().join("a.csv"), "").unwrap();
        let m = Manifest::new("check", vec!["check".into()], 7, None, Some("format = 1".into()), dir.path()).unwrap();
        assert_eq!(m.outputs.iter().map(|o| o.file.as_str()).collect::<Vec<_>>(), ["a.csv", "b.csv"]);
        let p = dir.path().join(MANIFEST_FILE);
        m.write(&p).unwrap();
        assert_eq!(Manifest::read(&p).unwrap(), m);
        assert_eq!(Manifest::new("check", vec![], 7, None, None, dir.path()).unwrap().outputs.len(), 2);
    }
}
