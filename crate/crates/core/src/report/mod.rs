//! Run configuration, fidelity-report assembly and file rendering.

mod render;

pub use render::render_report_files;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, PlatformId, StopwordList};
use crate::fidelity::{
    centroid_projection, compare_sentiment, compare_traits, embedding_similarity, topic_overlap,
    topic_space_distance, CentroidProjection, SentimentComparison, SimilarityStats,
    TopicOverlap, TopicSpaceStats, TraitComparison, TraitGrouping,
};
use crate::nergraph::{
    adherence_colors, build_entity_graph, common_entities, graph_stats, AdherenceColor,
    GraphMode, GraphStats,
};
use crate::providers::{Embedder, NerProvider, ProviderConfig, SentimentProvider};
use crate::sampling::Strategy;
use crate::seeds::{child_seed, fnv1a64};
use crate::topic::{get_topics, TopicModel, TopicModelParams, TopicVectorMode};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("missing config key {0}")]
    MissingKey(&'static str),
    #[error("invalid config value for {key}: {message}")]
    InvalidValue { key: &'static str, message: String },
    #[error("unresolvable path for {key}: {path}")]
    BadPath { key: &'static str, path: String },
    #[error("failed writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Paths to the corpora under comparison.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorporaConfig {
    /// Real corpus JSONL files, one per dataset platform file.
    pub real: Vec<PathBuf>,
    /// Synthetic corpus JSONL (for `eval`).
    pub synthetic: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProvidersConfig {
    /// Use the deterministic local baselines instead of remote endpoints.
    pub mock: bool,
    pub chat: Option<ProviderConfig>,
    pub embedding: Option<ProviderConfig>,
    /// `lexicon` is the only built-in sentiment classifier.
    pub sentiment: Option<String>,
    /// Path to a one-entity-per-line gazetteer for the NER baseline.
    pub ner_gazetteer: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub strategy: Strategy,
    /// Per-platform pool cap m.
    pub m: usize,
    pub n_jobs: usize,
    pub platform: Option<String>,
    pub single_topic: bool,
    pub dedup_examples: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            strategy: Strategy::Mptm,
            m: 10,
            n_jobs: 10,
            platform: None,
            single_topic: false,
            dedup_examples: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Topic-match cosine threshold.
    pub topic: f64,
    /// High-similarity recall threshold (strict).
    pub high: f64,
    /// Fair-similarity band, closed on both ends.
    pub fair: (f64, f64),
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            topic: 0.7,
            high: 0.8,
            fair: (0.6, 0.8),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub kmeans_k: usize,
    pub min_topic_size: usize,
    /// `member_centroid` (default) or `keyword_embedding`.
    pub topic_vector_mode: TopicVectorMode,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            kmeans_k: 50,
            min_topic_size: 10,
            topic_vector_mode: TopicVectorMode::MemberCentroid,
        }
    }
}

/// Whole-run configuration, read from one TOML document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub corpora: CorporaConfig,
    pub providers: ProvidersConfig,
    pub sampling: SamplingConfig,
    pub thresholds: Thresholds,
    pub evaluation: EvaluationConfig,
}

impl RunConfig {
    /// Check thresholds, paths and (non-mock) provider endpoints. Error
    /// messages name the offending key.
    pub fn validate(&self) -> Result<(), ReportError> {
        for (key, value) in [
            ("thresholds.topic", self.thresholds.topic),
            ("thresholds.high", self.thresholds.high),
            ("thresholds.fair[0]", self.thresholds.fair.0),
            ("thresholds.fair[1]", self.thresholds.fair.1),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(ReportError::InvalidValue {
                    key,
                    message: format!("{value} not in (0, 1]"),
                });
            }
        }
        if self.thresholds.fair.0 > self.thresholds.fair.1 {
            return Err(ReportError::InvalidValue {
                key: "thresholds.fair",
                message: "band start exceeds band end".to_string(),
            });
        }
        if self.sampling.m == 0 {
            return Err(ReportError::InvalidValue {
                key: "sampling.m",
                message: "must be at least 1".to_string(),
            });
        }
        for path in &self.corpora.real {
            if !path.exists() {
                return Err(ReportError::BadPath {
                    key: "corpora.real",
                    path: path.display().to_string(),
                });
            }
        }
        if let Some(path) = &self.corpora.synthetic {
            if !path.exists() {
                return Err(ReportError::BadPath {
                    key: "corpora.synthetic",
                    path: path.display().to_string(),
                });
            }
        }
        if let Some(path) = &self.providers.ner_gazetteer {
            if !path.exists() {
                return Err(ReportError::BadPath {
                    key: "providers.ner_gazetteer",
                    path: path.display().to_string(),
                });
            }
        }
        if !self.providers.mock {
            let chat = self
                .providers
                .chat
                .as_ref()
                .ok_or(ReportError::MissingKey("providers.chat.endpoint"))?;
            if chat.endpoint.is_empty() {
                return Err(ReportError::MissingKey("providers.chat.endpoint"));
            }
            let embedding = self
                .providers
                .embedding
                .as_ref()
                .ok_or(ReportError::MissingKey("providers.embedding.endpoint"))?;
            if embedding.endpoint.is_empty() {
                return Err(ReportError::MissingKey("providers.embedding.endpoint"));
            }
        }
        Ok(())
    }

    /// Hash of the semantically meaningful fields: the seed, provider,
    /// sampling, threshold and evaluation settings. File locations (corpus
    /// paths, output directory) are excluded so identical data evaluated
    /// from different directories hashes the same; formatting and key order
    /// in the source file never matter because the parsed structure is
    /// hashed.
    pub fn config_hash(&self) -> String {
        let mut hashable = self.clone();
        hashable.output_dir = None;
        hashable.corpora = CorporaConfig::default();
        let canonical = serde_json::to_string(&hashable).expect("config serializes");
        format!("{:016x}", fnv1a64(canonical.as_bytes()))
    }
}

/// A report section is either computed or explicitly skipped with a reason,
/// so partial offline evaluation still produces a complete document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Section<T> {
    Computed { data: T },
    Skipped { reason: String },
}

impl<T> Section<T> {
    pub fn computed(data: T) -> Self {
        Section::Computed { data }
    }

    pub fn skipped(reason: impl Into<String>) -> Self {
        Section::Skipped {
            reason: reason.into(),
        }
    }

    pub fn as_computed(&self) -> Option<&T> {
        match self {
            Section::Computed { data } => Some(data),
            Section::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSection {
    pub real_topic_count: usize,
    pub synthetic_topic_count: usize,
    pub overlap: TopicOverlap,
    pub space: TopicSpaceStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerGraphSection {
    pub mode: GraphMode,
    pub real_stats: GraphStats,
    pub synthetic_stats: GraphStats,
    pub top_common: Vec<AdherenceColor>,
    pub bottom_common: Vec<AdherenceColor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub strategy: Strategy,
    pub provider_labels: BTreeMap<String, String>,
    pub config_hash: String,
    pub real_posts: usize,
    pub synthetic_posts: usize,
    pub tool_version: String,
}

/// The full metric bundle comparing a synthetic corpus to a real one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub manifest: RunManifest,
    pub traits: Section<TraitComparison>,
    pub sentiment: Section<SentimentComparison>,
    pub topics: Section<TopicSection>,
    pub similarity: Section<SimilarityStats>,
    pub centroids: Section<CentroidProjection>,
    pub entities: Section<NerGraphSection>,
}

impl FidelityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Providers available to an evaluation run. Sentiment and NER are
/// optional; their sections are skipped when absent.
pub struct EvalProviders {
    pub embedder: Embedder,
    pub sentiment: Option<Box<dyn SentimentProvider>>,
    pub ner: Option<Box<dyn NerProvider>>,
}

pub struct EvalOptions {
    pub seed: u64,
    pub strategy: Strategy,
    pub thresholds: Thresholds,
    pub kmeans_k: usize,
    pub topic_params: TopicModelParams,
    pub stopwords: StopwordList,
    pub config_hash: String,
}

impl EvalOptions {
    pub fn new(seed: u64, strategy: Strategy) -> Self {
        EvalOptions {
            seed,
            strategy,
            thresholds: Thresholds::default(),
            kmeans_k: 50,
            topic_params: TopicModelParams::default(),
            stopwords: StopwordList::default_bundle(),
            config_hash: String::new(),
        }
    }
}

/// Run the full metric suite. Metrics whose providers are unavailable or
/// whose preconditions fail are marked skipped with the reason; the report
/// itself always completes.
pub fn evaluate(
    real: &Corpus,
    synth: &Corpus,
    providers: &EvalProviders,
    options: &EvalOptions,
) -> FidelityReport {
    let mut provider_labels = BTreeMap::new();
    provider_labels.insert(
        "embedding".to_string(),
        providers.embedder.label().to_string(),
    );
    if let Some(s) = &providers.sentiment {
        provider_labels.insert("sentiment".to_string(), s.label().to_string());
    }
    if let Some(n) = &providers.ner {
        provider_labels.insert("ner".to_string(), n.label().to_string());
    }
    let synth_providers: std::collections::BTreeSet<String> = synth
        .posts()
        .iter()
        .filter_map(|p| p.provider.clone())
        .collect();
    if !synth_providers.is_empty() {
        provider_labels.insert(
            "generator".to_string(),
            synth_providers.into_iter().collect::<Vec<_>>().join(","),
        );
    }

    let manifest = RunManifest {
        seed: options.seed,
        strategy: options.strategy,
        provider_labels,
        config_hash: options.config_hash.clone(),
        real_posts: real.len(),
        synthetic_posts: synth.len(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };

    let grouping = if synth.platforms().iter().any(PlatformId::is_multi) {
        TraitGrouping::Pooled
    } else {
        TraitGrouping::PerPlatform
    };
    let traits = match compare_traits(real, synth, grouping) {
        Ok(t) => Section::computed(t),
        Err(e) => Section::skipped(e.to_string()),
    };

    let sentiment = match &providers.sentiment {
        None => Section::skipped("sentiment provider unavailable"),
        Some(classifier) => match compare_sentiment(real, synth, classifier.as_ref()) {
            Ok(s) => Section::computed(s),
            Err(e) => Section::skipped(e.to_string()),
        },
    };

    let topics = match evaluate_topics(real, synth, providers, options) {
        Ok(t) => Section::computed(t),
        Err(e) => Section::skipped(e),
    };

    let similarity = match embedding_similarity(
        real,
        synth,
        &providers.embedder,
        options.thresholds.high,
        options.thresholds.fair,
    ) {
        Ok(s) => Section::computed(s),
        Err(e) => Section::skipped(e.to_string()),
    };

    let centroids = match evaluate_centroids(real, synth, providers, options) {
        Ok(c) => Section::computed(c),
        Err(e) => Section::skipped(e),
    };

    let entities = match &providers.ner {
        None => Section::skipped("NER provider unavailable"),
        Some(ner) => match evaluate_entities(real, synth, ner.as_ref(), options) {
            Ok(section) => Section::computed(section),
            Err(e) => Section::skipped(e),
        },
    };

    FidelityReport {
        manifest,
        traits,
        sentiment,
        topics,
        similarity,
        centroids,
        entities,
    }
}

fn evaluate_topics(
    real: &Corpus,
    synth: &Corpus,
    providers: &EvalProviders,
    options: &EvalOptions,
) -> Result<TopicSection, String> {
    let fit = |corpus: &Corpus, index: u64| -> Result<TopicModel, String> {
        get_topics(
            &[corpus],
            &providers.embedder,
            &options.stopwords,
            &options.topic_params,
            child_seed(options.seed, "topics", index),
        )
        .map_err(|e| e.to_string())
    };
    let real_model = fit(real, 0)?;
    let synth_model = fit(synth, 1)?;
    let overlap = topic_overlap(&real_model, &synth_model, options.thresholds.topic)
        .map_err(|e| e.to_string())?;
    let space = topic_space_distance(
        &real_model,
        &synth_model,
        child_seed(options.seed, "topic-space", 0),
    )
    .map_err(|e| e.to_string())?;
    Ok(TopicSection {
        real_topic_count: real_model.topics().len(),
        synthetic_topic_count: synth_model.topics().len(),
        overlap,
        space,
    })
}

fn evaluate_centroids(
    real: &Corpus,
    synth: &Corpus,
    providers: &EvalProviders,
    options: &EvalOptions,
) -> Result<CentroidProjection, String> {
    let embed = |corpus: &Corpus| -> Result<Vec<crate::providers::EmbeddingVector>, String> {
        let texts: Vec<String> = corpus.posts().iter().map(|p| p.text.clone()).collect();
        providers
            .embedder
            .embed_batch(&texts)
            .map_err(|e| e.to_string())
    };
    centroid_projection(
        &embed(real)?,
        &embed(synth)?,
        options.kmeans_k,
        child_seed(options.seed, "centroid-projection", 0),
    )
    .map_err(|e| e.to_string())
}

fn evaluate_entities(
    real: &Corpus,
    synth: &Corpus,
    ner: &dyn NerProvider,
    options: &EvalOptions,
) -> Result<NerGraphSection, String> {
    let mode = match options.strategy {
        Strategy::Mptm => GraphMode::Mptm,
        Strategy::PerPlatform => GraphMode::PerPlatform,
    };
    let real_graph = build_entity_graph(real, ner, mode, None).map_err(|e| e.to_string())?;
    let synth_graph = build_entity_graph(synth, ner, mode, None).map_err(|e| e.to_string())?;
    let (top, bottom) = common_entities(&real_graph, &synth_graph).map_err(|e| e.to_string())?;
    let top_common =
        adherence_colors(&real_graph, &synth_graph, &top).map_err(|e| e.to_string())?;
    let bottom_common =
        adherence_colors(&real_graph, &synth_graph, &bottom).map_err(|e| e.to_string())?;
    Ok(NerGraphSection {
        mode,
        real_stats: graph_stats(&real_graph),
        synthetic_stats: graph_stats(&synth_graph),
        top_common,
        bottom_common,
    })
}

/// Write `report.json` plus the CSV/Markdown/SVG renderings into `out_dir`.
pub fn write_report(report: &FidelityReport, out_dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    render::render_report_files(report, out_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates_in_mock_mode() {
        let mut config = RunConfig::default();
        config.providers.mock = true;
        config.validate().unwrap();
    }

    #[test]
    fn non_mock_requires_chat_endpoint() {
        let config = RunConfig::default();
        let err = config.validate().unwrap_err();
        assert_eq!(err.to_string(), "missing config key providers.chat.endpoint");
    }

    #[test]
    fn thresholds_validated() {
        let mut config = RunConfig::default();
        config.providers.mock = true;
        config.thresholds.topic = 0.0;
        assert!(config.validate().is_err());
        config.thresholds.topic = 1.5;
        assert!(config.validate().is_err());
    }

    #[test]
    fn missing_real_path_names_key() {
        let mut config = RunConfig::default();
        config.providers.mock = true;
        config.corpora.real = vec![PathBuf::from("/definitely/not/here.jsonl")];
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("corpora.real"));
    }

    #[test]
    fn config_hash_tracks_semantic_fields_only() {
        let mut a = RunConfig::default();
        a.providers.mock = true;
        let mut b = a.clone();
        b.output_dir = Some(PathBuf::from("elsewhere"));
        b.corpora.real = vec![PathBuf::from("same/data/other/location.jsonl")];
        assert_eq!(a.config_hash(), b.config_hash());
        let mut c = a.clone();
        c.seed = 99;
        assert_ne!(a.config_hash(), c.config_hash());
        let mut d = a.clone();
        d.thresholds.topic = 0.71;
        assert_ne!(a.config_hash(), d.config_hash());
        let mut e = a.clone();
        e.sampling.n_jobs = 11;
        assert_ne!(a.config_hash(), e.config_hash());
    }
}
