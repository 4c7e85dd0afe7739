//! Deterministic on-disk response cache.
//!
//! One file per request hash holds the raw response bytes; a JSON sidecar
//! (`<hash>.meta.json`) records the timestamp and model id. Writes go to a
//! temp file first and are renamed into place, so a cache entry is either
//! absent or complete.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::providers::ChatRequest;

#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    timestamp: String,
    model_id: String,
}

impl ResponseCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(ResponseCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn get(&self, key: &str) -> Option<Vec<u8>> {
        fs::read(self.dir.join(key)).ok()
    }

    pub fn put(&self, key: &str, bytes: &[u8], model_id: &str) -> Result<()> {
        let sidecar = Sidecar {
            timestamp: chrono::Utc::now().to_rfc3339(),
            model_id: model_id.to_string(),
        };
        self.write_atomic(&format!("{key}.meta.json"), &serde_json::to_vec(&sidecar)?)?;
        self.write_atomic(key, bytes)
    }

    fn write_atomic(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let tmp = self.dir.join(format!(".{name}.tmp.{}", std::process::id()));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, self.dir.join(name))?;
        Ok(())
    }
}

/// Cache key for a chat request: hash of the model id and the full request
/// payload, including image bytes, so expensive judge calls are replayable.
pub fn chat_cache_key(req: &ChatRequest) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"chat\0");
    hasher.update(req.model_id.as_bytes());
    hasher.update(b"\0");
    hasher.update(req.system_prompt.as_bytes());
    hasher.update(b"\0");
    hasher.update(req.user_text.as_bytes());
    hasher.update(b"\0");
    hasher.update(req.temperature.to_le_bytes());
    hasher.update(req.top_p.to_le_bytes());
    hasher.update(req.response_format.as_str().as_bytes());
    for image in &req.images {
        hasher.update(b"\0img\0");
        hasher.update(image.mime.as_bytes());
        hasher.update(b"\0");
        hasher.update(&image.bytes);
    }
    hex::encode(hasher.finalize())
}

/// Cache key for one embedding input text.
pub fn embed_cache_key(model_id: &str, text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"embed\0");
    hasher.update(model_id.as_bytes());
    hasher.update(b"\0");
    hasher.update(text.as_bytes());
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::ResponseFormat;

    #[test]
    fn round_trip_returns_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::new(dir.path()).unwrap();
        assert!(cache.get("deadbeef").is_none());
        cache.put("deadbeef", b"payload \xf0\x9f\x93\x8a", "m1").unwrap();
        assert_eq!(
            cache.get("deadbeef").unwrap(),
            b"payload \xf0\x9f\x93\x8a".to_vec()
        );
        let sidecar = std::fs::read_to_string(dir.path().join("deadbeef.meta.json")).unwrap();
        assert!(sidecar.contains("\"model_id\":\"m1\""));
    }

    #[test]
    fn keys_depend_on_payload_and_images() {
        let mut a = ChatRequest::text("m", "sys", "user");
        let b = ChatRequest::text("m", "sys", "user");
        assert_eq!(chat_cache_key(&a), chat_cache_key(&b));

        a.user_text.push('!');
        assert_ne!(chat_cache_key(&a), chat_cache_key(&b));

        let mut c = ChatRequest::text("m", "sys", "user");
        c.images.push(crate::providers::ImageData {
            mime: "image/png".into(),
            bytes: vec![1, 2, 3],
        });
        assert_ne!(chat_cache_key(&c), chat_cache_key(&b));

        let mut d = ChatRequest::text("m", "sys", "user");
        d.response_format = ResponseFormat::Json;
        assert_ne!(chat_cache_key(&d), chat_cache_key(&b));

        assert_ne!(embed_cache_key("m", "x"), embed_cache_key("m", "y"));
        assert_ne!(embed_cache_key("m1", "x"), embed_cache_key("m2", "x"));
    }
}
