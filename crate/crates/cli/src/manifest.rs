use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Run record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_seconds: f64,
    pub status: String,
    pub exit_code: i32,
    pub message: Option<String>,
    pub outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_manifest(out: &Path, manifest: &Manifest) -> dyadnet::Result<()> {
    dyadnet::io::write_json(&out.join(MANIFEST_FILE), manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_of_empty_input() {
        assert_eq!(
            config_hash(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest {
            command: "predict".into(),
            config_sha256: config_hash(b"{}"),
            seed: Some(3),
            version: "0.1.0".into(),
            wall_time_seconds: 0.5,
            status: "ok".into(),
            exit_code: 0,
            message: None,
            outputs: vec!["predicted_transfers.csv".into()],
        };
        write_manifest(dir.path(), &m).unwrap();
        let back: Manifest = dyadnet::io::read_json(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(back, m);
    }
}
