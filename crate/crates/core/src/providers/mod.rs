//! Provider-agnostic clients for vision-capable chat completion and text
//! embedding.
//!
//! A [`ChatClient`] or [`EmbeddingClient`] wraps any backend implementing
//! the corresponding trait and adds transport retries with exponential
//! backoff, JSON-format validation retries, deterministic on-disk caching,
//! and a global in-flight concurrency limit. With caching enabled and a
//! mock backend the whole pipeline is bit-deterministic across runs.

pub mod cache;
pub mod http;
pub mod mock;

use std::collections::HashMap;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ProviderError;
pub use cache::{chat_cache_key, embed_cache_key, ResponseCache};

/// Default bound on simultaneous in-flight provider requests.
pub const DEFAULT_CONCURRENCY_LIMIT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseFormat {
    #[serde(rename = "free-text")]
    FreeText,
    Json,
}

impl ResponseFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResponseFormat::FreeText => "free-text",
            ResponseFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageData {
    pub mime: String,
    pub bytes: Vec<u8>,
}

/// A single chat-completion request. Defaults to temperature 0 and top-p 1
/// so repeated runs are as deterministic as the provider allows.
#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub model_id: String,
    pub system_prompt: String,
    pub user_text: String,
    pub images: Vec<ImageData>,
    pub response_format: ResponseFormat,
    pub temperature: f64,
    pub top_p: f64,
}

impl ChatRequest {
    pub fn text(
        model_id: impl Into<String>,
        system_prompt: impl Into<String>,
        user_text: impl Into<String>,
    ) -> Self {
        ChatRequest {
            model_id: model_id.into(),
            system_prompt: system_prompt.into(),
            user_text: user_text.into(),
            images: Vec::new(),
            response_format: ResponseFormat::FreeText,
            temperature: 0.0,
            top_p: 1.0,
        }
    }

    pub fn with_image(mut self, image: ImageData) -> Self {
        self.images.push(image);
        self
    }

    pub fn expecting_json(mut self) -> Self {
        self.response_format = ResponseFormat::Json;
        self
    }
}

#[derive(Debug, Clone)]
pub struct ChatResponse {
    pub text: String,
    pub provider_meta: serde_json::Map<String, serde_json::Value>,
}

impl ChatResponse {
    pub fn new(text: impl Into<String>) -> Self {
        ChatResponse {
            text: text.into(),
            provider_meta: serde_json::Map::new(),
        }
    }
}

/// Backend for chat completion; one raw call, no retries or caching.
pub trait ChatProvider: Send + Sync {
    fn name(&self) -> &str;
    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, ProviderError>;
}

/// Backend for text embedding; one raw call for a batch of texts.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;
    fn embed(&self, model_id: &str, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    dimension: usize,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ProviderError> {
        if values.is_empty() {
            return Err(ProviderError::Transport(
                "embedding provider returned an empty vector".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ProviderError::Transport(
                "embedding vector contains non-finite entries".into(),
            ));
        }
        let dimension = values.len();
        Ok(EmbeddingVector { values, dimension })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

/// Standard cosine similarity, clamped to [-1, 1].
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, ProviderError> {
    if a.dimension() != b.dimension() {
        return Err(ProviderError::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        });
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    let norm_a: f64 = a.values.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b: f64 = b.values.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(ProviderError::ZeroVector);
    }
    Ok((dot / (norm_a * norm_b)).clamp(-1.0, 1.0))
}

/// Transport retry policy: `max_attempts` total tries with exponential
/// backoff and jitter between them. The same attempt budget bounds the
/// JSON-format validation retries.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    /// No delays between attempts; for tests and mock backends.
    pub fn immediate() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::ZERO,
        }
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let base = self.base_delay.as_millis() as u64;
        if base == 0 {
            return Duration::ZERO;
        }
        let exp = base.saturating_mul(1u64 << attempt.min(16));
        let jitter = rand::thread_rng().gen_range(0..=base / 2);
        Duration::from_millis(exp + jitter)
    }
}

/// Counting semaphore bounding in-flight provider requests.
struct Semaphore {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            permits: Mutex::new(permits.max(1)),
            available: Condvar::new(),
        }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.available.wait(permits).unwrap();
        }
        *permits -= 1;
        SemaphoreGuard { semaphore: self }
    }
}

struct SemaphoreGuard<'a> {
    semaphore: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        *self.semaphore.permits.lock().unwrap() += 1;
        self.semaphore.available.notify_one();
    }
}

/// Retrying, caching chat client. Shareable across threads.
pub struct ChatClient {
    provider: Arc<dyn ChatProvider>,
    model_id: String,
    cache: Option<ResponseCache>,
    retry: RetryPolicy,
    limiter: Semaphore,
}

impl ChatClient {
    pub fn new(provider: Arc<dyn ChatProvider>, model_id: impl Into<String>) -> Self {
        ChatClient {
            provider,
            model_id: model_id.into(),
            cache: None,
            retry: RetryPolicy::default(),
            limiter: Semaphore::new(DEFAULT_CONCURRENCY_LIMIT),
        }
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_concurrency_limit(mut self, limit: usize) -> Self {
        self.limiter = Semaphore::new(limit);
        self
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    /// Builds a request bound to this client's model id.
    pub fn request(&self, system_prompt: &str, user_text: &str) -> ChatRequest {
        ChatRequest::text(self.model_id.clone(), system_prompt, user_text)
    }

    /// Completes a chat request. Cache hits return the stored bytes without
    /// touching the provider. For JSON-format requests, responses that fail
    /// to parse are re-requested up to the retry budget; the retry count is
    /// recorded in `provider_meta.json_retries`.
    pub fn chat_complete(&self, req: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        let key = chat_cache_key(req);
        if let Some(cache) = &self.cache {
            if let Some(bytes) = cache.get(&key) {
                let mut resp = ChatResponse::new(String::from_utf8_lossy(&bytes).into_owned());
                resp.provider_meta
                    .insert("cache".into(), serde_json::Value::String("hit".into()));
                return Ok(resp);
            }
        }

        let _permit = self.limiter.acquire();
        let mut last_raw = String::new();
        for json_attempt in 0..self.retry.max_attempts {
            let mut resp = self.call_with_transport_retries(req)?;
            if req.response_format == ResponseFormat::Json
                && serde_json::from_str::<serde_json::Value>(&resp.text).is_err()
            {
                log::warn!(
                    "provider {} returned non-JSON text for a JSON-format request (attempt {})",
                    self.provider.name(),
                    json_attempt + 1
                );
                last_raw = resp.text;
                continue;
            }
            if json_attempt > 0 {
                resp.provider_meta
                    .insert("json_retries".into(), serde_json::json!(json_attempt));
            }
            if let Some(cache) = &self.cache {
                cache
                    .put(&key, resp.text.as_bytes(), &req.model_id)
                    .map_err(|e| ProviderError::Transport(format!("cache write failed: {e}")))?;
            }
            return Ok(resp);
        }
        Err(ProviderError::MalformedJson {
            attempts: self.retry.max_attempts,
            raw: last_raw,
        })
    }

    fn call_with_transport_retries(
        &self,
        req: &ChatRequest,
    ) -> Result<ChatResponse, ProviderError> {
        let mut attempt = 0;
        loop {
            let result = self.provider.chat(req).and_then(|resp| {
                if resp.text.is_empty() {
                    Err(ProviderError::Transport("empty response text".into()))
                } else {
                    Ok(resp)
                }
            });
            match result {
                Ok(resp) => return Ok(resp),
                Err(e) if e.is_retryable() && attempt + 1 < self.retry.max_attempts => {
                    log::warn!(
                        "provider {} attempt {} failed ({e}); retrying",
                        self.provider.name(),
                        attempt + 1
                    );
                    std::thread::sleep(self.retry.backoff(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Retrying, caching embedding client with an in-memory memo on top of the
/// per-text disk cache.
pub struct EmbeddingClient {
    provider: Arc<dyn EmbeddingProvider>,
    model_id: String,
    cache: Option<ResponseCache>,
    retry: RetryPolicy,
    limiter: Semaphore,
    memo: Mutex<HashMap<String, EmbeddingVector>>,
}

impl EmbeddingClient {
    pub fn new(provider: Arc<dyn EmbeddingProvider>, model_id: impl Into<String>) -> Self {
        EmbeddingClient {
            provider,
            model_id: model_id.into(),
            cache: None,
            retry: RetryPolicy::default(),
            limiter: Semaphore::new(DEFAULT_CONCURRENCY_LIMIT),
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn embed_one(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        Ok(self.embed(std::slice::from_ref(&text.to_string()))?.remove(0))
    }

    /// Embeds each text, serving repeats from the memo and disk cache; one
    /// provider call covers all remaining misses.
    pub fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        if texts.is_empty() || texts.iter().any(|t| t.is_empty()) {
            return Err(ProviderError::Transport(
                "embedding input must be non-empty texts".into(),
            ));
        }
        let mut results: Vec<Option<EmbeddingVector>> = vec![None; texts.len()];
        let mut misses: Vec<usize> = Vec::new();
        {
            let memo = self.memo.lock().unwrap();
            for (i, text) in texts.iter().enumerate() {
                if let Some(v) = memo.get(text) {
                    results[i] = Some(v.clone());
                } else {
                    misses.push(i);
                }
            }
        }
        if let Some(cache) = &self.cache {
            misses.retain(|&i| {
                let key = embed_cache_key(&self.model_id, &texts[i]);
                match cache
                    .get(&key)
                    .and_then(|bytes| serde_json::from_slice::<Vec<f64>>(&bytes).ok())
                    .and_then(|values| EmbeddingVector::new(values).ok())
                {
                    Some(v) => {
                        self.memo.lock().unwrap().insert(texts[i].clone(), v.clone());
                        results[i] = Some(v);
                        false
                    }
                    None => true,
                }
            });
        }
        if !misses.is_empty() {
            let batch: Vec<String> = misses.iter().map(|&i| texts[i].clone()).collect();
            let vectors = self.call_with_transport_retries(&batch)?;
            if vectors.len() != batch.len() {
                return Err(ProviderError::Transport(format!(
                    "embedding provider returned {} vectors for {} inputs",
                    vectors.len(),
                    batch.len()
                )));
            }
            let dim = vectors[0].dimension();
            if vectors.iter().any(|v| v.dimension() != dim) {
                return Err(ProviderError::Transport(
                    "embedding vectors have inconsistent dimensions".into(),
                ));
            }
            for (&i, vector) in misses.iter().zip(vectors) {
                if let Some(cache) = &self.cache {
                    let key = embed_cache_key(&self.model_id, &texts[i]);
                    let bytes = serde_json::to_vec(vector.values())
                        .map_err(|e| ProviderError::Transport(e.to_string()))?;
                    cache
                        .put(&key, &bytes, &self.model_id)
                        .map_err(|e| ProviderError::Transport(format!("cache write failed: {e}")))?;
                }
                self.memo
                    .lock()
                    .unwrap()
                    .insert(texts[i].clone(), vector.clone());
                results[i] = Some(vector);
            }
        }
        Ok(results.into_iter().map(|v| v.unwrap()).collect())
    }

    fn call_with_transport_retries(
        &self,
        texts: &[String],
    ) -> Result<Vec<EmbeddingVector>, ProviderError> {
        let _permit = self.limiter.acquire();
        let mut attempt = 0;
        loop {
            match self.provider.embed(&self.model_id, texts) {
                Ok(vectors) => return Ok(vectors),
                Err(e) if e.is_retryable() && attempt + 1 < self.retry.max_attempts => {
                    log::warn!(
                        "embedding provider {} attempt {} failed ({e}); retrying",
                        self.provider.name(),
                        attempt + 1
                    );
                    std::thread::sleep(self.retry.backoff(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::mock::{MockChatProvider, MockEmbeddingProvider};
    use super::*;

    fn unit(values: Vec<f64>) -> EmbeddingVector {
        EmbeddingVector::new(values).unwrap()
    }

    #[test]
    fn cosine_basic_identities() {
        let v = unit(vec![0.6, 0.8]);
        let neg = unit(vec![-0.6, -0.8]);
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert!((cosine_similarity(&v, &neg).unwrap() + 1.0).abs() < 1e-12);
        let e1 = unit(vec![1.0, 0.0]);
        let e2 = unit(vec![0.0, 1.0]);
        assert_eq!(cosine_similarity(&e1, &e2).unwrap(), 0.0);
    }

    #[test]
    fn cosine_rejects_bad_inputs() {
        let a = unit(vec![1.0, 0.0]);
        let b = unit(vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            cosine_similarity(&a, &b),
            Err(ProviderError::DimensionMismatch { .. })
        ));
        let zero = EmbeddingVector {
            values: vec![0.0, 0.0],
            dimension: 2,
        };
        assert!(matches!(
            cosine_similarity(&a, &zero),
            Err(ProviderError::ZeroVector)
        ));
    }

    #[test]
    fn mock_echo_and_cache_hit_skip_network() {
        let dir = tempfile::tempdir().unwrap();
        let mock = Arc::new(MockChatProvider::fixed("canned reply"));
        let client = ChatClient::new(mock.clone(), "mock-model")
            .with_cache(ResponseCache::new(dir.path()).unwrap())
            .with_retry(RetryPolicy::immediate());
        let req = client.request("sys", "hello");
        let first = client.chat_complete(&req).unwrap();
        assert_eq!(first.text, "canned reply");
        assert_eq!(mock.call_count(), 1);
        let second = client.chat_complete(&req).unwrap();
        assert_eq!(second.text, first.text);
        assert_eq!(mock.call_count(), 1, "second call must be served from cache");
    }

    #[test]
    fn json_format_retries_then_succeeds_with_count() {
        let mock = Arc::new(MockChatProvider::scripted(vec![
            "this is prose".into(),
            "still prose".into(),
            r#"{"ok":true}"#.into(),
        ]));
        let client =
            ChatClient::new(mock.clone(), "mock-model").with_retry(RetryPolicy::immediate());
        let req = client.request("sys", "give json").expecting_json();
        let resp = client.chat_complete(&req).unwrap();
        assert_eq!(resp.text, r#"{"ok":true}"#);
        assert_eq!(resp.provider_meta["json_retries"], serde_json::json!(2));
        assert_eq!(mock.call_count(), 3);
    }

    #[test]
    fn json_format_fails_after_budget_with_raw_text() {
        let mock = Arc::new(MockChatProvider::fixed("never json"));
        let client = ChatClient::new(mock, "mock-model").with_retry(RetryPolicy::immediate());
        let req = client.request("sys", "give json").expecting_json();
        match client.chat_complete(&req) {
            Err(ProviderError::MalformedJson { attempts, raw }) => {
                assert_eq!(attempts, 3);
                assert_eq!(raw, "never json");
            }
            other => panic!("expected MalformedJson, got {other:?}"),
        }
    }

    #[test]
    fn embeddings_are_cached_bit_identically() {
        let dir = tempfile::tempdir().unwrap();
        let mock = Arc::new(MockEmbeddingProvider::new(8));
        let client = EmbeddingClient::new(mock.clone(), "embed-model")
            .with_cache(ResponseCache::new(dir.path()).unwrap())
            .with_retry(RetryPolicy::immediate());
        let a = client.embed_one("x").unwrap();
        let b = client.embed_one("x").unwrap();
        assert_eq!(a, b);
        assert_eq!(mock.call_count(), 1);
        assert!((cosine_similarity(&a, &b).unwrap() - 1.0).abs() < 1e-6);

        // A fresh client with the same disk cache must reproduce the bits.
        let cold = EmbeddingClient::new(Arc::new(MockEmbeddingProvider::new(8)), "embed-model")
            .with_cache(ResponseCache::new(dir.path()).unwrap());
        assert_eq!(cold.embed_one("x").unwrap(), a);
    }

    #[test]
    fn orthogonal_mock_tokens_have_zero_cosine() {
        let mock = MockEmbeddingProvider::new(4)
            .with_vector("alpha", vec![1.0, 0.0, 0.0, 0.0])
            .with_vector("beta", vec![0.0, 1.0, 0.0, 0.0]);
        let client = EmbeddingClient::new(Arc::new(mock), "embed-model");
        let vectors = client.embed(&["alpha".into(), "beta".into()]).unwrap();
        assert_eq!(cosine_similarity(&vectors[0], &vectors[1]).unwrap(), 0.0);
    }

    #[test]
    fn embed_rejects_empty_inputs() {
        let client = EmbeddingClient::new(Arc::new(MockEmbeddingProvider::new(4)), "m");
        assert!(client.embed(&[]).is_err());
        assert!(client.embed(&["".into()]).is_err());
    }
}
