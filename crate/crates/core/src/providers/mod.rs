//! Pluggable interfaces for the four model-backed capabilities: chat
//! generation, text embedding, sentiment classification and named-entity
//! recognition.
//!
//! Remote implementations speak the OpenAI-compatible JSON protocol
//! ([`remote`]); the local baselines ([`MockEmbedder`], [`MockChat`],
//! [`LexiconSentiment`], [`GazetteerNer`]) are deterministic so the whole
//! pipeline is bit-reproducible offline from a single seed.

mod gazetteer;
mod lexicon;
mod limiter;
mod mock;
pub mod remote;

pub use gazetteer::GazetteerNer;
pub(crate) use gazetteer::normalize as gazetteer_normalize;
pub use lexicon::LexiconSentiment;
pub use limiter::RateLimiter;
pub use mock::{MockChat, MockEmbedder};
pub use remote::{RemoteChat, RemoteEmbedder};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::seeds::fnv1a64;

/// Default environment variable holding the API key.
pub const DEFAULT_API_KEY_ENV: &str = "SYNTHCORPUS_API_KEY";

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("empty input batch")]
    EmptyBatch,
    #[error("empty prompt")]
    EmptyPrompt,
    #[error("empty completion")]
    EmptyCompletion,
    #[error("dimension mismatch in batch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot infer embedding dimension from batch of degenerate inputs")]
    UnknownDimension,
    #[error("HTTP status {status} after {attempts} attempt(s): {message}")]
    Http {
        status: u16,
        attempts: u32,
        message: String,
    },
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("invalid provider config: {0}")]
    InvalidConfig(String),
}

/// Configuration for one remote provider endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    /// Base URL, e.g. `https://api.openai.com`.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Requests per minute admitted by the client-side token bucket.
    #[serde(default = "default_rate_limit")]
    pub rate_limit_per_min: f64,
    /// Sampling temperature; chat only.
    #[serde(default)]
    pub temperature: Option<f64>,
    /// Base backoff between retries; doubles per attempt.
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    /// Inputs longer than this many characters are truncated with a warning.
    #[serde(default)]
    pub input_char_limit: Option<usize>,
}

fn default_api_key_env() -> String {
    DEFAULT_API_KEY_ENV.to_string()
}
fn default_max_retries() -> u32 {
    3
}
fn default_timeout_secs() -> u64 {
    30
}
fn default_rate_limit() -> f64 {
    60.0
}
fn default_backoff_ms() -> u64 {
    250
}

impl ProviderConfig {
    pub fn new(endpoint: &str, model: &str) -> Self {
        ProviderConfig {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            api_key_env: default_api_key_env(),
            max_retries: default_max_retries(),
            timeout_secs: default_timeout_secs(),
            rate_limit_per_min: default_rate_limit(),
            temperature: None,
            backoff_ms: default_backoff_ms(),
            input_char_limit: None,
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.endpoint.is_empty() {
            return Err(ProviderError::InvalidConfig("endpoint is empty".into()));
        }
        if self.rate_limit_per_min <= 0.0 {
            return Err(ProviderError::InvalidConfig(
                "rate_limit_per_min must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// A fixed-length embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        EmbeddingVector { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Unit basis vector e0, substituted for degenerate (empty) inputs.
    pub fn reserved_basis(dim: usize) -> Self {
        let mut values = vec![0.0; dim];
        values[0] = 1.0;
        EmbeddingVector { values }
    }

    pub fn normalized(&self) -> Self {
        let norm = self.l2_norm();
        if norm == 0.0 {
            return self.clone();
        }
        EmbeddingVector {
            values: self.values.iter().map(|v| v / norm).collect(),
        }
    }

    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        cosine(&self.values, &other.values)
    }
}

/// Cosine similarity of two raw slices; 0.0 when either norm vanishes.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Normalized positive/neutral/negative scores for one post.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScores {
    pub positive: f64,
    pub neutral: f64,
    pub negative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Neutral,
    Negative,
}

impl SentimentScores {
    /// Normalize raw non-negative scores to sum to 1.
    pub fn normalized(positive: f64, neutral: f64, negative: f64) -> Self {
        let sum = positive + neutral + negative;
        debug_assert!(sum > 0.0);
        SentimentScores {
            positive: positive / sum,
            neutral: neutral / sum,
            negative: negative / sum,
        }
    }

    /// Highest-scoring category; any tie resolves to neutral.
    pub fn argmax(&self) -> SentimentLabel {
        if self.positive > self.neutral && self.positive > self.negative {
            SentimentLabel::Positive
        } else if self.negative > self.positive && self.negative > self.neutral {
            SentimentLabel::Negative
        } else {
            SentimentLabel::Neutral
        }
    }
}

/// One entity mention with byte offsets into the post text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub surface: String,
    pub label: String,
    pub span: (usize, usize),
}

pub trait ChatProvider: Send + Sync {
    fn label(&self) -> &str;
    /// Send one prompt and return the raw completion text.
    fn chat_complete(&self, prompt: &str) -> Result<String, ProviderError>;
}

pub trait EmbeddingProvider: Send + Sync {
    fn label(&self) -> &str;
    /// Raw, unnormalized embeddings, one per input text, in input order.
    fn embed_raw(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError>;
    /// Known output dimension, if the provider can say up front.
    fn dim_hint(&self) -> Option<usize> {
        None
    }
    /// Character budget per input; longer texts are truncated by the wrapper.
    fn input_char_limit(&self) -> Option<usize> {
        None
    }
}

pub trait SentimentProvider: Send + Sync {
    fn label(&self) -> &str;
    fn classify_sentiment(&self, text: &str) -> Result<SentimentScores, ProviderError>;
}

pub trait NerProvider: Send + Sync {
    fn label(&self) -> &str;
    /// Non-overlapping mentions, left to right.
    fn extract_entities(&self, text: &str) -> Result<Vec<EntityMention>, ProviderError>;
}

/// Caller-facing embedding wrapper: chunking, truncation, dimension checks
/// and L2 normalization, with the reserved-basis substitution for degenerate
/// inputs.
///
/// Normalized components snap to a 1e-9 grid. Rescaling a provider's raw
/// output by any positive factor therefore produces bit-identical vectors,
/// which keeps every cosine-based metric exactly scale invariant instead of
/// merely within rounding noise of it.
pub struct Embedder {
    provider: Box<dyn EmbeddingProvider>,
    chunk_size: usize,
    max_in_flight: usize,
}

const COMPONENT_GRID: f64 = 1e-9;

fn snap_to_grid(value: f64) -> f64 {
    (value / COMPONENT_GRID).round() * COMPONENT_GRID
}

impl Embedder {
    pub fn new(provider: Box<dyn EmbeddingProvider>) -> Self {
        Embedder {
            provider,
            chunk_size: 64,
            max_in_flight: 4,
        }
    }

    pub fn with_chunking(mut self, chunk_size: usize, max_in_flight: usize) -> Self {
        self.chunk_size = chunk_size.max(1);
        self.max_in_flight = max_in_flight.max(1);
        self
    }

    pub fn label(&self) -> &str {
        self.provider.label()
    }

    /// Embed a non-empty batch. Output vectors are L2-normalized and all of
    /// one dimension; inputs that embed to the zero vector come back as the
    /// reserved basis vector e0.
    pub fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        if texts.is_empty() {
            return Err(ProviderError::EmptyBatch);
        }
        let prepared: Vec<String> = match self.provider.input_char_limit() {
            None => texts.to_vec(),
            Some(limit) => texts
                .iter()
                .map(|t| {
                    if t.chars().count() > limit {
                        log::warn!("truncating over-limit embedding input to {limit} chars");
                        t.chars().take(limit).collect()
                    } else {
                        t.clone()
                    }
                })
                .collect(),
        };

        let chunks: Vec<&[String]> = prepared.chunks(self.chunk_size).collect();
        let mut raw: Vec<Vec<f64>> = Vec::with_capacity(prepared.len());
        for group in chunks.chunks(self.max_in_flight) {
            let mut results: Vec<Option<Result<Vec<Vec<f64>>, ProviderError>>> =
                (0..group.len()).map(|_| None).collect();
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for chunk in group.iter() {
                    let provider = &self.provider;
                    handles.push(scope.spawn(move || {
                        log::debug!(
                            "embed request {:016x} ({} texts) via {}",
                            batch_hash(chunk),
                            chunk.len(),
                            provider.label()
                        );
                        provider.embed_raw(chunk)
                    }));
                }
                for (slot, handle) in results.iter_mut().zip(handles) {
                    *slot = Some(handle.join().expect("embedding worker panicked"));
                }
            });
            for slot in results {
                raw.extend(slot.expect("worker result recorded")?);
            }
        }

        if raw.len() != prepared.len() {
            return Err(ProviderError::MalformedResponse(format!(
                "expected {} vectors, got {}",
                prepared.len(),
                raw.len()
            )));
        }

        let dim = raw
            .iter()
            .find(|v| !v.is_empty())
            .map(|v| v.len())
            .or(self.provider.dim_hint())
            .ok_or(ProviderError::UnknownDimension)?;
        for v in &raw {
            if !v.is_empty() && v.len() != dim {
                return Err(ProviderError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }

        Ok(raw
            .into_iter()
            .map(|values| {
                let vector = EmbeddingVector::new(if values.is_empty() {
                    vec![0.0; dim]
                } else {
                    values
                });
                if vector.l2_norm() == 0.0 {
                    log::warn!("degenerate embedding input; substituting reserved basis vector");
                    EmbeddingVector::reserved_basis(dim)
                } else {
                    let mut normalized = vector.normalized();
                    for v in normalized.values.iter_mut() {
                        *v = snap_to_grid(*v);
                    }
                    normalized
                }
            })
            .collect())
    }
}

fn batch_hash(texts: &[String]) -> u64 {
    let mut acc: u64 = 0xcbf2_9ce4_8422_2325;
    for t in texts {
        acc ^= fnv1a64(t.as_bytes());
        acc = acc.wrapping_mul(0x0000_0100_0000_01b3);
    }
    acc
}

/// Classify a whole corpus, one score per post, in post order.
pub fn classify_batch(
    provider: &dyn SentimentProvider,
    texts: &[String],
) -> Result<Vec<SentimentScores>, ProviderError> {
    let results = par::map_slice(texts, |t| provider.classify_sentiment(t));
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentiment_scores_sum_to_one() {
        let s = SentimentScores::normalized(3.0, 1.0, 2.0);
        assert!((s.positive + s.neutral + s.negative - 1.0).abs() < 1e-6);
    }

    #[test]
    fn argmax_tie_is_neutral() {
        let s = SentimentScores::normalized(1.0, 1.0, 1.0);
        assert_eq!(s.argmax(), SentimentLabel::Neutral);
        let s = SentimentScores::normalized(2.0, 1.0, 2.0);
        assert_eq!(s.argmax(), SentimentLabel::Neutral);
        let s = SentimentScores::normalized(3.0, 1.0, 2.0);
        assert_eq!(s.argmax(), SentimentLabel::Positive);
    }

    #[test]
    fn embedder_empty_batch_rejected() {
        let embedder = Embedder::new(Box::new(MockEmbedder::new()));
        assert!(matches!(
            embedder.embed_batch(&[]),
            Err(ProviderError::EmptyBatch)
        ));
    }

    #[test]
    fn embedder_substitutes_basis_for_empty_text() {
        let embedder = Embedder::new(Box::new(MockEmbedder::new()));
        let out = embedder.embed_batch(&[String::new()]).unwrap();
        assert_eq!(out[0], EmbeddingVector::reserved_basis(64));
    }

    #[test]
    fn embedder_output_normalized() {
        let embedder = Embedder::new(Box::new(MockEmbedder::new()));
        let out = embedder
            .embed_batch(&["vote vote ballot".to_string()])
            .unwrap();
        // Unit norm up to the 1e-9 component grid.
        assert!((out[0].l2_norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn embedder_truncates_over_limit_inputs() {
        struct Limited(MockEmbedder);
        impl EmbeddingProvider for Limited {
            fn label(&self) -> &str {
                "limited"
            }
            fn embed_raw(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
                for t in texts {
                    assert!(t.chars().count() <= 10, "wrapper must truncate: {t:?}");
                }
                self.0.embed_raw(texts)
            }
            fn dim_hint(&self) -> Option<usize> {
                self.0.dim_hint()
            }
            fn input_char_limit(&self) -> Option<usize> {
                Some(10)
            }
        }
        let embedder = Embedder::new(Box::new(Limited(MockEmbedder::new())));
        let out = embedder
            .embed_batch(&["a very long text well past the limit".to_string()])
            .unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn embedder_chunking_preserves_order() {
        let embedder = Embedder::new(Box::new(MockEmbedder::new())).with_chunking(3, 2);
        let texts: Vec<String> = (0..20).map(|i| format!("word{i} shared")).collect();
        let chunked = embedder.embed_batch(&texts).unwrap();
        let whole = Embedder::new(Box::new(MockEmbedder::new()))
            .embed_batch(&texts)
            .unwrap();
        assert_eq!(chunked, whole);
    }
}
