use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use super::{EvidenceSource, ObservationKind, ObservationSeries, CACHE_DIR_ENV};
use crate::pattern::SearchPattern;

/// Content-addressed directory of cached observation series, one JSON file
/// per (engine, source fingerprint, pattern, kind, year) key.
#[derive(Debug)]
pub struct SeriesCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl SeriesCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SeriesCache {
            dir: dir.into(),
            write_lock: Mutex::new(()),
        }
    }

    /// `$INNOMETER_CACHE_DIR`, falling back to `<tmp>/innometer-cache`.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| std::env::temp_dir().join("innometer-cache"));
        SeriesCache::new(dir)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(
        source: &dyn EvidenceSource,
        pattern: &SearchPattern,
        kind: ObservationKind,
        year: Option<i32>,
    ) -> String {
        let material = serde_json::json!([
            source.engine_id(),
            source.fingerprint(),
            pattern.digest(),
            kind,
            year,
        ]);
        hex::encode(Sha256::digest(material.to_string().as_bytes()))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Unreadable or corrupt entries count as misses.
    pub fn get(&self, key: &str) -> Option<ObservationSeries> {
        let bytes = fs::read(self.path(key)).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    pub fn put(&self, key: &str, series: &ObservationSeries) -> io::Result<()> {
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        fs::create_dir_all(&self.dir)?;
        let target = self.path(key);
        let staging = self.dir.join(format!("{key}.json.tmp{}", std::process::id()));
        fs::write(&staging, serde_json::to_vec_pretty(series)?)?;
        fs::rename(staging, target)
    }
}
