//! On-disk cache of verification reports, keyed by spec, depth, selected
//! checks and tool version. Entries carry a checksum; anything that fails to
//! verify is discarded and recomputed.

use std::path::{Path, PathBuf};

use mggs::verifier::{ClaimId, Report};
use mggs::GgsSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::report::VERSION;

pub const CACHE_ENV: &str = "MGGS_CACHE_DIR";

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    checksum: String,
    payload: String,
}

/// `$MGGS_CACHE_DIR`, else `$HOME/.cache/mggs`, else a directory under the
/// system temp dir.
pub fn default_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_ENV) {
        return PathBuf::from(dir);
    }
    match std::env::var_os("HOME") {
        Some(home) => PathBuf::from(home).join(".cache").join("mggs"),
        None => std::env::temp_dir().join("mggs-cache"),
    }
}

pub fn key(version: &str, spec: &GgsSpec, depth: usize, checks: &[ClaimId]) -> String {
    let ids: Vec<&str> = checks.iter().map(|c| c.as_str()).collect();
    let text = format!("{version}|{spec}|depth={depth}|checks={}", ids.join(","));
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn checksum(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}

pub enum Lookup {
    Hit(Report),
    Miss,
    /// Present but unreadable or failing its checksum.
    Corrupt(String),
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn key_for(spec: &GgsSpec, depth: usize, checks: &[ClaimId]) -> String {
        key(VERSION, spec, depth, checks)
    }

    pub fn load(&self, key: &str) -> Lookup {
        let path = self.path(key);
        let Ok(text) = std::fs::read_to_string(&path) else {
            return Lookup::Miss;
        };
        let entry: Entry = match serde_json::from_str(&text) {
            Ok(e) => e,
            Err(e) => return Lookup::Corrupt(format!("{}: {e}", path.display())),
        };
        if entry.key != key || entry.checksum != checksum(&entry.payload) {
            return Lookup::Corrupt(format!("{}: checksum mismatch", path.display()));
        }
        match serde_json::from_str(&entry.payload) {
            Ok(report) => Lookup::Hit(report),
            Err(e) => Lookup::Corrupt(format!("{}: {e}", path.display())),
        }
    }

    pub fn store(&self, key: &str, report: &Report) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let payload = serde_json::to_string(report).expect("reports serialize");
        let entry = Entry {
            key: key.to_string(),
            checksum: checksum(&payload),
            payload,
        };
        // Write then rename so readers never see a half-written entry.
        let tmp = self.dir.join(format!("{key}.tmp"));
        std::fs::write(&tmp, serde_json::to_string(&entry).expect("entries serialize"))?;
        std::fs::rename(tmp, self.path(key))
    }
}
