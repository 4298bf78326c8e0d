use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::GraphError;
use crate::hash::sha256_hex;

/// Identity of one derived feature: equal keys mean a byte-equal prompt
/// against the same model under the same template version. Wall-clock
/// never participates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCacheKey {
    pub template_version: String,
    pub operation: String,
    /// Digest of all prompt inputs (the rendered prompt bytes).
    pub input_digest: String,
    pub model_id: String,
}

impl FeatureCacheKey {
    pub fn new(operation: &str, prompt: &str, model_id: &str) -> Self {
        Self {
            template_version: crate::prompt::TEMPLATE_VERSION.to_owned(),
            operation: operation.to_owned(),
            input_digest: sha256_hex(prompt),
            model_id: model_id.to_owned(),
        }
    }

    /// Digest naming the cache file; covers every key field.
    pub fn entry_digest(&self) -> String {
        sha256_hex(format!(
            "{}\x1f{}\x1f{}\x1f{}",
            self.template_version, self.operation, self.input_digest, self.model_id
        ))
    }
}

/// A cached raw completion together with its parsed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachedValue<T> {
    pub raw_completion: String,
    pub value: T,
}

#[derive(Deserialize)]
struct CacheEntry<T> {
    #[serde(flatten)]
    key: FeatureCacheKey,
    raw_completion: String,
    value: T,
    #[serde(default)]
    #[allow(dead_code)]
    timestamp: u64,
}

#[derive(Serialize)]
struct CacheEntryRef<'a, T> {
    #[serde(flatten)]
    key: &'a FeatureCacheKey,
    raw_completion: &'a str,
    value: &'a T,
    timestamp: u64,
}

/// Disk-backed feature memo: one JSON file per entry under
/// `cache/<operation>/<digest>.json`, written atomically
/// (temp-then-rename). Writes are single-writer serialized; reads are
/// lock-free. Corrupt entries count as misses with a warning.
pub struct FeatureCache {
    root: PathBuf,
    write_lock: Mutex<()>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    warnings: Mutex<Vec<String>>,
}

impl FeatureCache {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, GraphError> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| GraphError::Cache {
            path: root.display().to_string(),
            source: e,
        })?;
        Ok(Self {
            root,
            write_lock: Mutex::new(()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            warnings: Mutex::new(Vec::new()),
        })
    }

    pub fn hit_count(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn miss_count(&self) -> usize {
        self.misses.load(Ordering::SeqCst)
    }

    pub fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut self.warnings.lock().unwrap())
    }

    fn entry_path(&self, key: &FeatureCacheKey) -> PathBuf {
        self.root.join(&key.operation).join(format!("{}.json", key.entry_digest()))
    }

    /// Returns the stored value on a hit without invoking the producer; on
    /// a miss, invokes it, persists atomically, and returns the value.
    pub fn memoize<T, F>(
        &self,
        key: &FeatureCacheKey,
        producer: F,
    ) -> Result<CachedValue<T>, GraphError>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<CachedValue<T>, GraphError>,
    {
        let path = self.entry_path(key);
        match std::fs::read(&path) {
            Ok(bytes) => match serde_json::from_slice::<CacheEntry<T>>(&bytes) {
                Ok(entry) if entry.key == *key => {
                    self.hits.fetch_add(1, Ordering::SeqCst);
                    return Ok(CachedValue {
                        raw_completion: entry.raw_completion,
                        value: entry.value,
                    });
                }
                Ok(_) => self.warn(format!(
                    "cache entry {} belongs to a different key; rederiving",
                    path.display()
                )),
                Err(e) => self.warn(format!(
                    "corrupt cache entry {}: {e}; rederiving",
                    path.display()
                )),
            },
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => {
                return Err(GraphError::Cache { path: path.display().to_string(), source: e })
            }
        }

        self.misses.fetch_add(1, Ordering::SeqCst);
        let produced = producer()?;
        self.persist(key, &path, &produced)?;
        Ok(produced)
    }

    fn persist<T: Serialize>(
        &self,
        key: &FeatureCacheKey,
        path: &Path,
        value: &CachedValue<T>,
    ) -> Result<(), GraphError> {
        let io = |e: std::io::Error| GraphError::Cache {
            path: path.display().to_string(),
            source: e,
        };
        let _guard = self.write_lock.lock().unwrap();
        let parent = path.parent().expect("entry paths always have a parent");
        std::fs::create_dir_all(parent).map_err(io)?;
        let entry = CacheEntryRef {
            key,
            raw_completion: &value.raw_completion,
            value: &value.value,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let tmp = path.with_extension("json.tmp");
        let body = serde_json::to_vec_pretty(&entry).expect("cache entries serialize");
        std::fs::write(&tmp, body).map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)?;
        Ok(())
    }

    fn warn(&self, message: String) {
        self.warnings.lock().unwrap().push(message);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn key(op: &str, prompt: &str, model: &str) -> FeatureCacheKey {
        FeatureCacheKey::new(op, prompt, model)
    }

    fn produce(text: &str, calls: &Cell<usize>) -> Result<CachedValue<String>, GraphError> {
        calls.set(calls.get() + 1);
        Ok(CachedValue { raw_completion: text.to_owned(), value: text.to_owned() })
    }

    #[test]
    fn miss_then_hit_invokes_producer_once() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FeatureCache::open(dir.path()).unwrap();
        let calls = Cell::new(0);
        let k = key("op", "prompt", "m1");
        cache.memoize(&k, || produce("v", &calls)).unwrap();
        let second = cache.memoize(&k, || produce("v", &calls)).unwrap();
        assert_eq!(calls.get(), 1);
        assert_eq!(second.value, "v");
        assert_eq!(cache.hit_count(), 1);
        assert_eq!(cache.miss_count(), 1);
    }

    #[test]
    fn model_id_participates_in_the_key() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FeatureCache::open(dir.path()).unwrap();
        let calls = Cell::new(0);
        cache
            .memoize(&key("op", "prompt", "m1"), || produce("a", &calls))
            .unwrap();
        cache
            .memoize(&key("op", "prompt", "m2"), || produce("b", &calls))
            .unwrap();
        assert_eq!(calls.get(), 2);
    }

    #[test]
    fn corrupt_entry_is_a_miss_with_warning_and_gets_rewritten() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FeatureCache::open(dir.path()).unwrap();
        let calls = Cell::new(0);
        let k = key("op", "prompt", "m1");
        cache.memoize(&k, || produce("v", &calls)).unwrap();

        let path = dir.path().join("op").join(format!("{}.json", k.entry_digest()));
        std::fs::write(&path, b"{ not json").unwrap();

        let again = cache.memoize(&k, || produce("v2", &calls)).unwrap();
        assert_eq!(calls.get(), 2);
        assert_eq!(again.value, "v2");
        assert_eq!(cache.take_warnings().len(), 1);
        // entry is valid again
        let third = cache.memoize(&k, || produce("v3", &calls)).unwrap();
        assert_eq!(calls.get(), 2);
        assert_eq!(third.value, "v2");
    }

    #[test]
    fn entries_live_under_the_operation_directory() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FeatureCache::open(dir.path()).unwrap();
        let calls = Cell::new(0);
        let k = key("faceted_summary", "p", "m");
        cache.memoize(&k, || produce("v", &calls)).unwrap();
        let expected = dir
            .path()
            .join("faceted_summary")
            .join(format!("{}.json", k.entry_digest()));
        assert!(expected.is_file());
    }
}
