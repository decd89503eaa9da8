//! Run manifests: everything needed to repeat a run, as pretty-printed JSON.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_SCHEMA: &str = "netcp-manifest/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of_bytes(path: impl Into<String>, bytes: &[u8]) -> Self {
        Self {
            path: path.into(),
            sha256: sha256_hex(bytes),
        }
    }

    pub fn of_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::of_bytes(path.display().to_string(), &bytes))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub threads: usize,
    /// Fully resolved parameters, defaults included.
    pub parameters: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Free-form facts about the run, such as the number of change points.
    #[serde(default)]
    pub notes: BTreeMap<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(command: impl Into<String>, seed: Option<u64>, threads: usize) -> Self {
        Self {
            schema: MANIFEST_SCHEMA.into(),
            tool: "netcp".into(),
            version: crate::VERSION.into(),
            command: command.into(),
            seed,
            threads,
            parameters: serde_json::Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let m: Manifest =
            serde_json::from_str(text).map_err(|e| Error::format(source, e.to_string()))?;
        if m.schema != MANIFEST_SCHEMA {
            return Err(Error::format(
                source,
                format!("field `schema`: expected \"{MANIFEST_SCHEMA}\""),
            ));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

/// Writes `contents` to `path`, going through a temporary sibling so a crash
/// never leaves a half-written file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn json_round_trip() {
        let mut m = Manifest::new("simulate", Some(7), 4);
        m.parameters = serde_json::json!({"m": 40});
        m.notes.insert("k".into(), 0.into());
        m.outputs.push(FileDigest::of_bytes("a.bin", b"abc"));
        let back = Manifest::parse(&m.to_json(), "m.json").unwrap();
        assert_eq!(back, m);
        assert!(Manifest::parse("{}", "m.json").is_err());
    }
}
