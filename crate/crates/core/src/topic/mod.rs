//! Topic modeling engine: embed → reduce → cluster → keyword extraction.
//!
//! [`get_topics`] combines posts from all platforms, embeds the cleaned
//! texts, reduces to 5 dimensions, clusters with HDBSCAN and scores
//! per-cluster keywords with c-TFIDF. Each reported topic carries an
//! L2-normalized topic vector in the full embedding space.

pub mod ctfidf;
pub mod hdbscan;
pub mod knn;
pub mod umap;

pub use hdbscan::{HdbscanParams, NOISE};
pub use knn::Metric;
pub use umap::UmapParams;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{clean_text_for_topics, Corpus, StopwordList};
use crate::par;
use crate::providers::{Embedder, EmbeddingVector, ProviderError};
use crate::seeds::child_seed;

#[derive(Debug, Error)]
pub enum TopicError {
    #[error("{points} points but {needed} needed; {hint}")]
    TooFewPoints {
        points: usize,
        needed: usize,
        hint: &'static str,
    },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("failed reading/writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad model file: {0}")]
    BadModelFile(String),
}

/// How topic vectors are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopicVectorMode {
    /// L2-normalized centroid of member posts' full-dimensional embeddings.
    MemberCentroid,
    /// Embedding of the concatenated top keywords.
    KeywordEmbedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModelParams {
    pub umap: UmapParams,
    pub hdbscan: HdbscanParams,
    /// Clusters smaller than this are kept in the assignment but not
    /// reported as topics.
    pub min_topic_size: usize,
    pub top_keywords: usize,
    pub vector_mode: TopicVectorMode,
}

impl Default for TopicModelParams {
    fn default() -> Self {
        TopicModelParams {
            umap: UmapParams::for_components(5),
            hdbscan: HdbscanParams::default(),
            min_topic_size: 10,
            top_keywords: 10,
            vector_mode: TopicVectorMode::MemberCentroid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    /// Cluster label this topic was extracted from.
    pub id: i32,
    pub size: usize,
    /// Weight-descending keywords, ties lexicographic.
    pub keywords: Vec<Keyword>,
    pub member_post_ids: Vec<String>,
    /// L2-normalized vector in the full embedding space.
    pub vector: EmbeddingVector,
}

/// Fitted topic model artifacts.
///
/// Embeddings and the reduced matrix are fit artifacts kept in memory; the
/// serialized form carries topics, labels, seed and params.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    format_version: u32,
    seed: u64,
    provider: String,
    embed_dim: usize,
    params: TopicModelParams,
    post_ids: Vec<String>,
    labels: Vec<i32>,
    topics: Vec<Topic>,
    #[serde(skip)]
    embeddings: Vec<EmbeddingVector>,
    #[serde(skip)]
    reduced: Vec<Vec<f64>>,
}

const MODEL_FORMAT_VERSION: u32 = 1;

impl TopicModel {
    /// Assemble a model from parts, validating the structural invariants.
    /// Used by loaders and tests; [`get_topics`] is the fitting path.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        seed: u64,
        provider: &str,
        embed_dim: usize,
        params: TopicModelParams,
        post_ids: Vec<String>,
        labels: Vec<i32>,
        topics: Vec<Topic>,
        embeddings: Vec<EmbeddingVector>,
        reduced: Vec<Vec<f64>>,
    ) -> Result<Self, TopicError> {
        if post_ids.len() != labels.len() {
            return Err(TopicError::BadModelFile(format!(
                "{} post ids vs {} labels",
                post_ids.len(),
                labels.len()
            )));
        }
        let mut prev_id = i32::MIN;
        for topic in &topics {
            if topic.id <= prev_id {
                return Err(TopicError::BadModelFile(
                    "topics must be sorted by unique id".into(),
                ));
            }
            prev_id = topic.id;
            if topic.size != topic.member_post_ids.len() {
                return Err(TopicError::BadModelFile(format!(
                    "topic {} size {} != member count {}",
                    topic.id,
                    topic.size,
                    topic.member_post_ids.len()
                )));
            }
            if topic.vector.dim() != embed_dim {
                return Err(TopicError::BadModelFile(format!(
                    "topic {} vector dim {} != embed dim {}",
                    topic.id,
                    topic.vector.dim(),
                    embed_dim
                )));
            }
            for pair in topic.keywords.windows(2) {
                if pair[1].weight > pair[0].weight {
                    return Err(TopicError::BadModelFile(format!(
                        "topic {} keywords not weight-sorted",
                        topic.id
                    )));
                }
            }
        }
        Ok(TopicModel {
            format_version: MODEL_FORMAT_VERSION,
            seed,
            provider: provider.to_string(),
            embed_dim,
            params,
            post_ids,
            labels,
            topics,
            embeddings,
            reduced,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn provider(&self) -> &str {
        &self.provider
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    pub fn params(&self) -> &TopicModelParams {
        &self.params
    }

    pub fn topics(&self) -> &[Topic] {
        &self.topics
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn post_ids(&self) -> &[String] {
        &self.post_ids
    }

    pub fn embeddings(&self) -> &[EmbeddingVector] {
        &self.embeddings
    }

    pub fn reduced(&self) -> &[Vec<f64>] {
        &self.reduced
    }

    /// Cluster label for a post id, if the post was part of the fit.
    pub fn label_of(&self, post_id: &str) -> Option<i32> {
        self.post_ids
            .iter()
            .position(|id| id == post_id)
            .map(|i| self.labels[i])
    }

    pub fn topic(&self, id: i32) -> Option<&Topic> {
        self.topics.iter().find(|t| t.id == id)
    }

    /// Deterministic serialized form.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), TopicError> {
        std::fs::write(path, self.to_json()).map_err(|source| TopicError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TopicError> {
        let raw = std::fs::read_to_string(path).map_err(|source| TopicError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let model: TopicModel =
            serde_json::from_str(&raw).map_err(|e| TopicError::BadModelFile(e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(TopicError::BadModelFile(format!(
                "unsupported format version {}",
                model.format_version
            )));
        }
        Ok(model)
    }
}

/// Fit a topic model over the combined posts of all corpora.
pub fn get_topics(
    corpora: &[&Corpus],
    embedder: &Embedder,
    stopwords: &StopwordList,
    params: &TopicModelParams,
    seed: u64,
) -> Result<TopicModel, TopicError> {
    let posts: Vec<&crate::corpus::Post> =
        corpora.iter().flat_map(|c| c.posts().iter()).collect();
    let n = posts.len();
    if n < params.hdbscan.min_cluster_size {
        return Err(TopicError::TooFewPoints {
            points: n,
            needed: params.hdbscan.min_cluster_size,
            hint: "combined corpora must reach min_cluster_size",
        });
    }

    let cleaned: Vec<String> =
        par::map_slice(&posts, |p| clean_text_for_topics(&p.text, stopwords));
    let embeddings = embedder.embed_batch(&cleaned)?;
    let embed_dim = embeddings[0].dim();

    let matrix: Vec<Vec<f64>> = embeddings.iter().map(|e| e.values().to_vec()).collect();
    let umap_params = params.umap.clone().clamped_for(n);
    let reduced = umap::reduce(&matrix, &umap_params, child_seed(seed, "umap", 0))?;
    let labels = hdbscan::cluster(&reduced, &params.hdbscan)?;

    let mut docs_by_class: BTreeMap<i32, Vec<String>> = BTreeMap::new();
    let mut members_by_class: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, &label) in labels.iter().enumerate() {
        if label == NOISE {
            continue;
        }
        docs_by_class.entry(label).or_default().push(cleaned[i].clone());
        members_by_class.entry(label).or_default().push(i);
    }
    let keywords_by_class = ctfidf::ctfidf_keywords(&docs_by_class, params.top_keywords);

    let mut topics = Vec::new();
    for (&class, members) in &members_by_class {
        if members.len() < params.min_topic_size {
            continue;
        }
        let keywords: Vec<Keyword> = keywords_by_class
            .get(&class)
            .map(|list| {
                list.iter()
                    .map(|(term, weight)| Keyword {
                        term: term.clone(),
                        weight: *weight,
                    })
                    .collect()
            })
            .unwrap_or_default();
        let vector = match params.vector_mode {
            TopicVectorMode::MemberCentroid => {
                let mut centroid = vec![0.0; embed_dim];
                for &i in members {
                    for (c, v) in centroid.iter_mut().zip(embeddings[i].values()) {
                        *c += v;
                    }
                }
                let len = members.len() as f64;
                for c in centroid.iter_mut() {
                    *c /= len;
                }
                EmbeddingVector::new(centroid).normalized()
            }
            TopicVectorMode::KeywordEmbedding => {
                let text = keywords
                    .iter()
                    .map(|k| k.term.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                embedder.embed_batch(&[text])?.remove(0)
            }
        };
        topics.push(Topic {
            id: class,
            size: members.len(),
            keywords,
            member_post_ids: members.iter().map(|&i| posts[i].id.clone()).collect(),
            vector,
        });
    }

    TopicModel::from_parts(
        seed,
        embedder.label(),
        embed_dim,
        params.clone(),
        posts.iter().map(|p| p.id.clone()).collect(),
        labels,
        topics,
        embeddings,
        reduced,
    )
}
