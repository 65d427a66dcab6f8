//! OpenAI-compatible HTTP providers for chat completions and embeddings.
//!
//! Both speak the `POST /v1/chat/completions` and `POST /v1/embeddings`
//! JSON protocols, which front all the commercial vendors via gateways.
//! Requests go through a token-bucket rate limiter and retry transient
//! failures (429, 5xx, transport) with exponential backoff.

use std::time::Duration;

use serde_json::{json, Value};

use super::{ChatProvider, EmbeddingProvider, ProviderConfig, ProviderError, RateLimiter};
use crate::seeds::fnv1a64;

pub struct RemoteChat {
    client: RemoteClient,
}

pub struct RemoteEmbedder {
    client: RemoteClient,
}

struct RemoteClient {
    agent: ureq::Agent,
    config: ProviderConfig,
    limiter: RateLimiter,
    label: String,
}

impl RemoteClient {
    fn new(config: ProviderConfig, kind: &str) -> Result<Self, ProviderError> {
        config.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        let label = format!("{}:{}", kind, config.model);
        let limiter = RateLimiter::per_minute(config.rate_limit_per_min);
        Ok(RemoteClient {
            agent,
            config,
            limiter,
            label,
        })
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.config.endpoint.trim_end_matches('/'), path)
    }

    /// POST with rate limiting and retry. 429/5xx/transport failures retry
    /// with exponential backoff up to `max_retries`; other HTTP statuses
    /// fail immediately.
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
        let url = self.url(path);
        let body_text = body.to_string();
        log::debug!(
            "provider request {:016x} to {} via {}",
            fnv1a64(body_text.as_bytes()),
            path,
            self.label
        );
        let api_key = std::env::var(&self.config.api_key_env).ok();

        let mut attempt: u32 = 0;
        loop {
            attempt += 1;
            self.limiter.acquire();
            let mut request = self
                .agent
                .post(&url)
                .header("content-type", "application/json");
            if let Some(key) = &api_key {
                request = request.header("authorization", &format!("Bearer {key}"));
            }
            let result = request.send(body_text.as_bytes());
            match result {
                Ok(mut response) => {
                    return response
                        .body_mut()
                        .read_json::<Value>()
                        .map_err(|e| ProviderError::MalformedResponse(e.to_string()));
                }
                Err(ureq::Error::StatusCode(status)) => {
                    let retryable = status == 429 || status >= 500;
                    if retryable && attempt <= self.config.max_retries {
                        self.backoff(attempt);
                        continue;
                    }
                    return Err(ProviderError::Http {
                        status,
                        attempts: attempt,
                        message: format!("{url} returned {status}"),
                    });
                }
                Err(err) => {
                    if attempt <= self.config.max_retries {
                        self.backoff(attempt);
                        continue;
                    }
                    return Err(ProviderError::Transport {
                        attempts: attempt,
                        message: err.to_string(),
                    });
                }
            }
        }
    }

    fn backoff(&self, attempt: u32) {
        let ms = self.config.backoff_ms.saturating_mul(1u64 << (attempt - 1).min(8));
        std::thread::sleep(Duration::from_millis(ms));
    }
}

impl RemoteChat {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        Ok(RemoteChat {
            client: RemoteClient::new(config, "chat")?,
        })
    }
}

impl ChatProvider for RemoteChat {
    fn label(&self) -> &str {
        &self.client.label
    }

    fn chat_complete(&self, prompt: &str) -> Result<String, ProviderError> {
        if prompt.is_empty() {
            return Err(ProviderError::EmptyPrompt);
        }
        let mut body = json!({
            "model": self.client.config.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        if let Some(t) = self.client.config.temperature {
            body["temperature"] = json!(t);
        }
        let response = self.client.post_json("/v1/chat/completions", &body)?;
        let content = response["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| {
                ProviderError::MalformedResponse("missing choices[0].message.content".into())
            })?;
        if content.trim().is_empty() {
            return Err(ProviderError::EmptyCompletion);
        }
        Ok(content.to_string())
    }
}

impl RemoteEmbedder {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        Ok(RemoteEmbedder {
            client: RemoteClient::new(config, "embed")?,
        })
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn label(&self) -> &str {
        &self.client.label
    }

    fn embed_raw(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let body = json!({
            "model": self.client.config.model,
            "input": texts,
        });
        let response = self.client.post_json("/v1/embeddings", &body)?;
        let data = response["data"].as_array().ok_or_else(|| {
            ProviderError::MalformedResponse("missing data array".into())
        })?;
        // Order by the protocol's index field, not array position.
        let mut out: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
        for item in data {
            let index = item["index"].as_u64().ok_or_else(|| {
                ProviderError::MalformedResponse("missing data[].index".into())
            })? as usize;
            let values = item["embedding"]
                .as_array()
                .ok_or_else(|| ProviderError::MalformedResponse("missing data[].embedding".into()))?
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| {
                    ProviderError::MalformedResponse("non-numeric embedding value".into())
                }))
                .collect::<Result<Vec<f64>, _>>()?;
            if index >= out.len() {
                return Err(ProviderError::MalformedResponse(format!(
                    "embedding index {index} out of range"
                )));
            }
            out[index] = Some(values);
        }
        out.into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    ProviderError::MalformedResponse(format!("missing embedding for input {i}"))
                })
            })
            .collect()
    }

    fn input_char_limit(&self) -> Option<usize> {
        self.client.config.input_char_limit
    }
}
