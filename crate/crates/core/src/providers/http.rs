//! HTTP backends speaking the OpenAI-compatible wire format, which most
//! hosted chat and embedding endpoints accept. Images travel as base64
//! data URLs inside the user message content.

use base64::Engine;
use serde_json::{json, Value};

use crate::error::ProviderError;
use crate::providers::{
    ChatProvider, ChatRequest, ChatResponse, EmbeddingProvider, EmbeddingVector, ResponseFormat,
};

fn read_api_key(env_name: &str) -> Result<String, ProviderError> {
    std::env::var(env_name).map_err(|_| ProviderError::MissingCredentials(env_name.to_string()))
}

fn http_client(name: &str) -> Result<reqwest::blocking::Client, ProviderError> {
    reqwest::blocking::Client::builder()
        .timeout(std::time::Duration::from_secs(300))
        .build()
        .map_err(|e| ProviderError::Transport(format!("{name}: failed to build client: {e}")))
}

fn post_json(
    client: &reqwest::blocking::Client,
    url: &str,
    api_key: &str,
    body: &Value,
) -> Result<Value, ProviderError> {
    let response = client
        .post(url)
        .bearer_auth(api_key)
        .json(body)
        .send()
        .map_err(|e| ProviderError::Transport(e.to_string()))?;
    let status = response.status();
    let text = response
        .text()
        .map_err(|e| ProviderError::Transport(e.to_string()))?;
    if status.as_u16() == 429 {
        return Err(ProviderError::RateLimited);
    }
    if !status.is_success() {
        return Err(ProviderError::Http {
            status: status.as_u16(),
            body: text,
        });
    }
    serde_json::from_str(&text)
        .map_err(|e| ProviderError::Transport(format!("invalid JSON envelope: {e}")))
}

/// Vision-capable chat backend for one provider profile.
pub struct HttpChatProvider {
    client: reqwest::blocking::Client,
    base_url: String,
    api_key: String,
}

impl HttpChatProvider {
    pub fn new(base_url: impl Into<String>, api_key_env: &str) -> Result<Self, ProviderError> {
        Ok(HttpChatProvider {
            client: http_client("chat")?,
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key: read_api_key(api_key_env)?,
        })
    }
}

impl ChatProvider for HttpChatProvider {
    fn name(&self) -> &str {
        "http-chat"
    }

    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        let user_content = if req.images.is_empty() {
            Value::String(req.user_text.clone())
        } else {
            let mut parts = vec![json!({"type": "text", "text": req.user_text})];
            for image in &req.images {
                let encoded = base64::engine::general_purpose::STANDARD.encode(&image.bytes);
                parts.push(json!({
                    "type": "image_url",
                    "image_url": {"url": format!("data:{};base64,{encoded}", image.mime)},
                }));
            }
            Value::Array(parts)
        };
        let mut messages = Vec::new();
        if !req.system_prompt.is_empty() {
            messages.push(json!({"role": "system", "content": req.system_prompt}));
        }
        messages.push(json!({"role": "user", "content": user_content}));
        let mut body = json!({
            "model": req.model_id,
            "messages": messages,
            "temperature": req.temperature,
            "top_p": req.top_p,
        });
        if req.response_format == ResponseFormat::Json {
            body["response_format"] = json!({"type": "json_object"});
        }

        let envelope = post_json(
            &self.client,
            &format!("{}/chat/completions", self.base_url),
            &self.api_key,
            &body,
        )?;
        let text = envelope["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| {
                ProviderError::Transport("response envelope has no message content".into())
            })?
            .to_string();
        let mut resp = ChatResponse::new(text);
        if let Some(usage) = envelope.get("usage") {
            resp.provider_meta.insert("usage".into(), usage.clone());
        }
        Ok(resp)
    }
}

/// Text-embedding backend for one provider profile.
pub struct HttpEmbeddingProvider {
    client: reqwest::blocking::Client,
    base_url: String,
    api_key: String,
}

impl HttpEmbeddingProvider {
    pub fn new(base_url: impl Into<String>, api_key_env: &str) -> Result<Self, ProviderError> {
        Ok(HttpEmbeddingProvider {
            client: http_client("embeddings")?,
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key: read_api_key(api_key_env)?,
        })
    }
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn name(&self) -> &str {
        "http-embed"
    }

    fn embed(
        &self,
        model_id: &str,
        texts: &[String],
    ) -> Result<Vec<EmbeddingVector>, ProviderError> {
        let body = json!({"model": model_id, "input": texts});
        let envelope = post_json(
            &self.client,
            &format!("{}/embeddings", self.base_url),
            &self.api_key,
            &body,
        )?;
        let data = envelope["data"]
            .as_array()
            .ok_or_else(|| ProviderError::Transport("embedding envelope has no data".into()))?;
        let mut indexed: Vec<(usize, Vec<f64>)> = Vec::with_capacity(data.len());
        for (fallback_index, item) in data.iter().enumerate() {
            let index = item["index"].as_u64().map(|i| i as usize).unwrap_or(fallback_index);
            let values = item["embedding"]
                .as_array()
                .ok_or_else(|| ProviderError::Transport("embedding item is not an array".into()))?
                .iter()
                .map(|v| v.as_f64().unwrap_or(f64::NAN))
                .collect();
            indexed.push((index, values));
        }
        indexed.sort_by_key(|(i, _)| *i);
        indexed
            .into_iter()
            .map(|(_, values)| EmbeddingVector::new(values))
            .collect()
    }
}
