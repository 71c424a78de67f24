//! Run manifests: what ran, with which seed, and the content hash of
//! every artifact, so a rerun can be checked for bit-identical outputs.

use crate::error::Error;
use crate::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

/// One output file and its SHA-256 content hash (lowercase hex).
#[derive(Debug, Clone, Serialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
}

/// Record of a CLI run. Field order is fixed, serialization is stable,
/// and no timestamps or host details are included, so two runs with the
/// same inputs produce byte-identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: String,
    pub out_dir: String,
    pub seed: u64,
    /// True when no seed was supplied and one was drawn from OS entropy.
    pub seed_generated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensor_count: Option<usize>,
    pub artifacts: Vec<ArtifactEntry>,
}

/// SHA-256 of a file's bytes as lowercase hex.
pub fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &str, out_dir: &str, seed: u64, generated: bool) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            config: config.to_string(),
            out_dir: out_dir.to_string(),
            seed,
            seed_generated: generated,
            sensor_count: None,
            artifacts: Vec::new(),
        }
    }

    /// Hash an artifact file and add it under its basename.
    pub fn push_artifact(&mut self, path: &Path) -> Result<()> {
        let file = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let sha256 = sha256_hex(path)?;
        self.artifacts.push(ArtifactEntry { file, sha256 });
        Ok(())
    }

    /// Write the manifest itself as pretty-printed JSON.
    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json + "\n").map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_matches_known_vector() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        std::fs::write(&path, b"abc").unwrap();
        assert_eq!(
            sha256_hex(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifests_are_deterministic_and_list_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let art = dir.path().join("results.csv");
        std::fs::write(&art, "a,b\n1,2\n").unwrap();
        let build = || {
            let mut m = RunManifest::new("simulate", "cfg/x.cfg", "out", 7, false);
            m.sensor_count = Some(864);
            m.push_artifact(&art).unwrap();
            m
        };
        let p1 = dir.path().join("m1.json");
        let p2 = dir.path().join("m2.json");
        build().write(&p1).unwrap();
        build().write(&p2).unwrap();
        let t1 = std::fs::read_to_string(&p1).unwrap();
        assert_eq!(t1, std::fs::read_to_string(&p2).unwrap());
        assert!(t1.contains("\"sensor_count\": 864"));
        assert!(t1.contains("results.csv"));
        assert!(t1.contains("\"seed\": 7"));
    }

    #[test]
    fn absent_sensor_count_is_omitted() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        RunManifest::new("equivalence", "e.cfg", "out", 1, true)
            .write(&p)
            .unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(!text.contains("sensor_count"));
        assert!(text.contains("\"seed_generated\": true"));
    }
}
