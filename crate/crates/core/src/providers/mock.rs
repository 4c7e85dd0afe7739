//! Mock providers for offline tests and deterministic replays.

use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use crate::error::ProviderError;
use crate::providers::{
    ChatProvider, ChatRequest, ChatResponse, EmbeddingProvider, EmbeddingVector,
};

type Router = Box<dyn Fn(&ChatRequest) -> Option<String> + Send + Sync>;

/// Chat backend answering from a scripted reply queue, a routing function,
/// or a fixed default, in that order. Every request is captured for
/// protocol-conformance assertions.
pub struct MockChatProvider {
    replies: Mutex<VecDeque<String>>,
    router: Option<Router>,
    default_reply: Option<String>,
    errors: Mutex<VecDeque<ProviderError>>,
    calls: Mutex<Vec<ChatRequest>>,
}

impl MockChatProvider {
    pub fn fixed(reply: impl Into<String>) -> Self {
        MockChatProvider {
            replies: Mutex::new(VecDeque::new()),
            router: None,
            default_reply: Some(reply.into()),
            errors: Mutex::new(VecDeque::new()),
            calls: Mutex::new(Vec::new()),
        }
    }

    pub fn scripted(replies: Vec<String>) -> Self {
        MockChatProvider {
            replies: Mutex::new(replies.into()),
            router: None,
            default_reply: None,
            errors: Mutex::new(VecDeque::new()),
            calls: Mutex::new(Vec::new()),
        }
    }

    pub fn routed(router: impl Fn(&ChatRequest) -> Option<String> + Send + Sync + 'static) -> Self {
        MockChatProvider {
            replies: Mutex::new(VecDeque::new()),
            router: Some(Box::new(router)),
            default_reply: None,
            errors: Mutex::new(VecDeque::new()),
            calls: Mutex::new(Vec::new()),
        }
    }

    /// Queues a transport-style error served before any scripted reply.
    pub fn push_error(&self, error: ProviderError) {
        self.errors.lock().unwrap().push_back(error);
    }

    pub fn push_reply(&self, reply: impl Into<String>) {
        self.replies.lock().unwrap().push_back(reply.into());
    }

    pub fn call_count(&self) -> usize {
        self.calls.lock().unwrap().len()
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.calls.lock().unwrap().clone()
    }
}

impl ChatProvider for MockChatProvider {
    fn name(&self) -> &str {
        "mock-chat"
    }

    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        self.calls.lock().unwrap().push(req.clone());
        if let Some(err) = self.errors.lock().unwrap().pop_front() {
            return Err(err);
        }
        if let Some(reply) = self.replies.lock().unwrap().pop_front() {
            return Ok(ChatResponse::new(reply));
        }
        if let Some(router) = &self.router {
            if let Some(reply) = router(req) {
                return Ok(ChatResponse::new(reply));
            }
        }
        if let Some(reply) = &self.default_reply {
            return Ok(ChatResponse::new(reply.clone()));
        }
        Err(ProviderError::NoScriptedReply)
    }
}

/// Embedding backend that returns fixed vectors for registered texts and a
/// deterministic hash-derived unit vector otherwise.
pub struct MockEmbeddingProvider {
    dimension: usize,
    fixed: HashMap<String, Vec<f64>>,
    calls: Mutex<usize>,
}

impl MockEmbeddingProvider {
    pub fn new(dimension: usize) -> Self {
        MockEmbeddingProvider {
            dimension: dimension.max(1),
            fixed: HashMap::new(),
            calls: Mutex::new(0),
        }
    }

    pub fn with_vector(mut self, text: impl Into<String>, values: Vec<f64>) -> Self {
        self.fixed.insert(text.into(), values);
        self
    }

    pub fn call_count(&self) -> usize {
        *self.calls.lock().unwrap()
    }

    fn derive(&self, text: &str) -> Vec<f64> {
        let mut values = Vec::with_capacity(self.dimension);
        let mut counter = 0u32;
        while values.len() < self.dimension {
            let mut hasher = Sha256::new();
            hasher.update(text.as_bytes());
            hasher.update(counter.to_le_bytes());
            for chunk in hasher.finalize().chunks_exact(8) {
                if values.len() == self.dimension {
                    break;
                }
                let raw = u64::from_le_bytes(chunk.try_into().unwrap());
                values.push((raw as f64 / u64::MAX as f64) * 2.0 - 1.0);
            }
            counter += 1;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        values.iter().map(|v| v / norm).collect()
    }
}

impl EmbeddingProvider for MockEmbeddingProvider {
    fn name(&self) -> &str {
        "mock-embed"
    }

    fn embed(
        &self,
        _model_id: &str,
        texts: &[String],
    ) -> Result<Vec<EmbeddingVector>, ProviderError> {
        *self.calls.lock().unwrap() += 1;
        texts
            .iter()
            .map(|text| {
                let values = self
                    .fixed
                    .get(text)
                    .cloned()
                    .unwrap_or_else(|| self.derive(text));
                EmbeddingVector::new(values)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_replies_pop_in_order_then_error() {
        let mock = MockChatProvider::scripted(vec!["one".into(), "two".into()]);
        let req = ChatRequest::text("m", "s", "u");
        assert_eq!(mock.chat(&req).unwrap().text, "one");
        assert_eq!(mock.chat(&req).unwrap().text, "two");
        assert!(matches!(
            mock.chat(&req),
            Err(ProviderError::NoScriptedReply)
        ));
        assert_eq!(mock.call_count(), 3);
    }

    #[test]
    fn derived_vectors_are_deterministic_unit_vectors() {
        let mock = MockEmbeddingProvider::new(16);
        let a = mock.embed("m", &["token".into()]).unwrap().remove(0);
        let b = mock.embed("m", &["token".into()]).unwrap().remove(0);
        assert_eq!(a, b);
        let norm: f64 = a.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
    }
}
