//! Map archives.
//!
//! ```text
//! offset  size  field
//! 0       8     magic "IVLMAPAR"
//! 8       4     format version (u32 LE)
//! 12      4     element type 1=f32, 2=f64 (u32 LE)
//! 16      8     payload length n (u64 LE)
//! 24      n     bincode payload: map, engine config, provenance
//! 24+n    32    SHA-256 of the payload
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{read_bytes, write_bytes};
use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::instance::IvlMap;
use crate::scalar::{ElementType, Scalar};

pub const MAGIC: &[u8; 8] = b"IVLMAPAR";
pub const VERSION: u32 = 1;
const HEADER: usize = 24;
const DIGEST: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Content hash of the source dataset or scene spec.
    pub dataset_hash: String,
    pub config_hash: String,
    pub tool_version: String,
}

impl Provenance {
    pub fn new(dataset_hash: impl Into<String>, config: &EngineConfig) -> Self {
        Self {
            dataset_hash: dataset_hash.into(),
            config_hash: sha256_hex(config.to_toml_string().as_bytes()),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A built map with the configuration it was built under. Vocabularies travel inside
/// the map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapArchive<T> {
    pub map: IvlMap<T>,
    pub config: EngineConfig,
    pub provenance: Provenance,
}

impl<T: Scalar> MapArchive<T> {
    pub fn encode(&self) -> Vec<u8> {
        let payload = bincode::serialize(self).expect("archive serializes");
        let mut out = Vec::with_capacity(HEADER + payload.len() + DIGEST);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&T::DTYPE.code().to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
        out.extend_from_slice(&Sha256::digest(&payload));
        out
    }

    /// `path` only labels errors.
    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..8] != MAGIC {
            return Err(Error::format(path, "not a map archive (bad magic)"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: VERSION,
            });
        }
        if bytes.len() < HEADER {
            return Err(Error::Checksum);
        }
        let code = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes"));
        if ElementType::from_code(code) != Some(T::DTYPE) {
            return Err(Error::format(
                path,
                format!("archive element type {code} does not match {:?}", T::DTYPE),
            ));
        }
        let n = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
        let end = usize::try_from(n).ok().and_then(|n| n.checked_add(HEADER));
        let Some(end) = end.filter(|&e| e.checked_add(DIGEST) == Some(bytes.len())) else {
            return Err(Error::Checksum);
        };
        let payload = &bytes[HEADER..end];
        if Sha256::digest(payload).as_slice() != &bytes[end..] {
            return Err(Error::Checksum);
        }
        bincode::deserialize(payload).map_err(|e| Error::format(path, e.to_string()))
    }
}

pub fn save_map<T: Scalar>(path: &Path, archive: &MapArchive<T>) -> Result<()> {
    write_bytes(path, &archive.encode())
}

pub fn load_map<T: Scalar>(path: &Path) -> Result<MapArchive<T>> {
    MapArchive::decode(&read_bytes(path)?, path)
}
