//! Structured run configuration files and their content hashes.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Loads a TOML file into `T`.
pub fn load_toml<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// SHA-256 over the canonical JSON form of a configuration.
///
/// Struct fields serialize in declaration order and all maps are ordered, so
/// equal configurations hash equally regardless of how the file was laid out.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes");
    format!("{:x}", Sha256::digest(&bytes))
}
