//! On-disk cache of reference solutions keyed by a SHA-256 of the text
//! that generated them.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"UAOSCREF";

#[derive(Debug, Clone)]
pub struct ReferenceCache {
    dir: PathBuf,
}

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn digest(key: &str) -> String {
        hex::encode(Sha256::digest(key.as_bytes()))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.bin", Self::digest(key)))
    }

    /// Cached vector for `key`, if present and intact. The key text is
    /// stored alongside the data and compared on load.
    pub fn load(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let path = self.path(key);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let corrupt = || Error::Parse(format!("corrupt cache entry {}", path.display()));
        if bytes.len() < 24 || &bytes[..8] != MAGIC {
            return Err(corrupt());
        }
        let klen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        let n = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes")) as usize;
        if bytes.len() != 24 + klen + 8 * n {
            return Err(corrupt());
        }
        if &bytes[24..24 + klen] != key.as_bytes() {
            return Ok(None);
        }
        let data = bytes[24 + klen..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Some(data))
    }

    pub fn store(&self, key: &str, values: &[f64]) -> Result<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let mut bytes = Vec::with_capacity(24 + key.len() + 8 * values.len());
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&(key.len() as u64).to_le_bytes());
        bytes.extend_from_slice(&(values.len() as u64).to_le_bytes());
        bytes.extend_from_slice(key.as_bytes());
        for v in values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let path = self.path(key);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, &bytes).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }

    /// Load `key` or compute and store it.
    pub fn get_or_compute(&self, key: &str, compute: impl FnOnce() -> Result<Vec<f64>>) -> Result<Vec<f64>> {
        if let Some(v) = self.load(key)? {
            return Ok(v);
        }
        let v = compute()?;
        self.store(key, &v)?;
        Ok(v)
    }
}
