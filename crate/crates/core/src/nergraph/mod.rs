//! Bipartite post–entity graphs and the degree-vector adherence metric.
//!
//! Entity nodes are keyed by normalized surface form (lowercase, collapsed
//! whitespace); post nodes carry a color class — their platform for
//! per-platform analysis, a single grey class for multi-platform output.
//! An edge means the post mentions the entity, deduplicated per pair, and
//! posts mentioning no entity stay out of the graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, PlatformId};
use crate::par;
use crate::providers::{gazetteer_normalize, NerProvider, ProviderError};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("platform order {got:?} does not cover the corpus platforms {expected:?}")]
    BadPlatformOrder { expected: Vec<String>, got: Vec<String> },
    #[error("graphs were built in different modes: {real} vs {synth}")]
    ModeMismatch { real: GraphMode, synth: GraphMode },
    #[error("no entities shared between the graphs")]
    NoCommonEntities,
    #[error("entity {entity} missing from the {side} graph")]
    MissingEntity { entity: String, side: &'static str },
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMode {
    /// Single grey post class; multi-platform synthetic output.
    Mptm,
    /// One color class per platform.
    PerPlatform,
}

impl std::fmt::Display for GraphMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphMode::Mptm => f.write_str("mptm"),
            GraphMode::PerPlatform => f.write_str("per_platform"),
        }
    }
}

const GREY_CLASS: &str = "grey";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityGraph {
    pub mode: GraphMode,
    /// Color classes in fixed order; RGB assignment follows this order.
    pub classes: Vec<String>,
    /// Entity node → per-class distinct-post degree counts.
    pub entities: BTreeMap<String, Vec<u64>>,
    /// Post nodes with at least one entity: (post id, class index).
    pub posts: Vec<(String, usize)>,
    /// Deduplicated (post id, entity) edges in post order.
    pub edges: Vec<(String, String)>,
}

/// Run NER over the corpus and assemble the bipartite graph.
///
/// `platform_order` fixes the class ordering for per-platform graphs (and
/// with it the red/green/blue assignment in figures); it must cover exactly
/// the corpus's platforms. Defaults to sorted platform names.
pub fn build_entity_graph(
    corpus: &Corpus,
    ner: &dyn NerProvider,
    mode: GraphMode,
    platform_order: Option<&[PlatformId]>,
) -> Result<EntityGraph, GraphError> {
    if corpus.is_empty() {
        return Err(GraphError::EmptyCorpus);
    }
    let classes: Vec<String> = match mode {
        GraphMode::Mptm => vec![GREY_CLASS.to_string()],
        GraphMode::PerPlatform => {
            let corpus_platforms: BTreeSet<String> = corpus
                .platforms()
                .iter()
                .map(|p| p.as_str().to_string())
                .collect();
            match platform_order {
                None => corpus_platforms.into_iter().collect(),
                Some(order) => {
                    let ordered: Vec<String> =
                        order.iter().map(|p| p.as_str().to_string()).collect();
                    let order_set: BTreeSet<String> = ordered.iter().cloned().collect();
                    if order_set != corpus_platforms {
                        return Err(GraphError::BadPlatformOrder {
                            expected: corpus_platforms.into_iter().collect(),
                            got: ordered,
                        });
                    }
                    ordered
                }
            }
        }
    };
    let class_index: BTreeMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();

    // NER is independent per post; results merge in post order.
    let mention_sets: Vec<Result<BTreeSet<String>, ProviderError>> =
        par::map_slice(corpus.posts(), |post| {
            Ok(ner
                .extract_entities(&post.text)?
                .into_iter()
                .map(|m| gazetteer_normalize(&m.surface))
                .filter(|s| !s.is_empty())
                .collect())
        });

    let mut entities: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    let mut posts = Vec::new();
    let mut edges = Vec::new();
    for (post, mentions) in corpus.posts().iter().zip(mention_sets) {
        let mentions = mentions?;
        if mentions.is_empty() {
            continue;
        }
        let class = match mode {
            GraphMode::Mptm => 0,
            GraphMode::PerPlatform => class_index[post.platform.as_str()],
        };
        posts.push((post.id.clone(), class));
        for entity in mentions {
            entities
                .entry(entity.clone())
                .or_insert_with(|| vec![0; classes.len()])[class] += 1;
            edges.push((post.id.clone(), entity));
        }
    }

    Ok(EntityGraph {
        mode,
        classes,
        entities,
        posts,
        edges,
    })
}

impl EntityGraph {
    /// Total degree of one entity across classes.
    pub fn degree(&self, entity: &str) -> Option<u64> {
        self.entities.get(entity).map(|v| v.iter().sum())
    }

    /// Degree vector aligned to another graph's class list, by class name;
    /// classes absent here count zero.
    fn degree_vector_for(&self, entity: &str, classes: &[String]) -> Option<Vec<u64>> {
        let own = self.entities.get(entity)?;
        Some(
            classes
                .iter()
                .map(|class| {
                    self.classes
                        .iter()
                        .position(|c| c == class)
                        .map(|i| own[i])
                        .unwrap_or(0)
                })
                .collect(),
        )
    }

    /// Node-list CSV: `kind,id,class`.
    pub fn node_csv(&self) -> String {
        let mut out = String::from("kind,id,class\n");
        for entity in self.entities.keys() {
            let _ = writeln!(out, "entity,{},white", csv_escape(entity));
        }
        for (post, class) in &self.posts {
            let _ = writeln!(out, "post,{},{}", csv_escape(post), self.classes[*class]);
        }
        out
    }

    /// Edge-list CSV: `post_id,entity`.
    pub fn edge_csv(&self) -> String {
        let mut out = String::from("post_id,entity\n");
        for (post, entity) in &self.edges {
            let _ = writeln!(out, "{},{}", csv_escape(post), csv_escape(entity));
        }
        out
    }
}

pub(crate) fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Node and edge counts per color class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub white_count: u64,
    pub posts_per_class: Vec<(String, u64)>,
    pub edges_per_class: Vec<(String, u64)>,
}

pub fn graph_stats(graph: &EntityGraph) -> GraphStats {
    let mut posts_per_class = vec![0u64; graph.classes.len()];
    for (_, class) in &graph.posts {
        posts_per_class[*class] += 1;
    }
    let mut edges_per_class = vec![0u64; graph.classes.len()];
    for counts in graph.entities.values() {
        for (e, c) in edges_per_class.iter_mut().zip(counts) {
            *e += c;
        }
    }
    GraphStats {
        white_count: graph.entities.len() as u64,
        posts_per_class: graph
            .classes
            .iter()
            .cloned()
            .zip(posts_per_class)
            .collect(),
        edges_per_class: graph
            .classes
            .iter()
            .cloned()
            .zip(edges_per_class)
            .collect(),
    }
}

/// Entities present in both graphs, ranked by real-graph degree descending
/// with lexicographic ties. Returns the top-20 slice and the bottom-20
/// slice in opposite order; with fewer than 40 common entities the slices
/// overlap.
pub fn common_entities(
    real: &EntityGraph,
    synth: &EntityGraph,
) -> Result<(Vec<String>, Vec<String>), GraphError> {
    let mut common: Vec<(String, u64)> = real
        .entities
        .keys()
        .filter(|e| synth.entities.contains_key(*e))
        .map(|e| (e.clone(), real.degree(e).unwrap_or(0)))
        .collect();
    if common.is_empty() {
        return Err(GraphError::NoCommonEntities);
    }
    common.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let ranked: Vec<String> = common.into_iter().map(|(e, _)| e).collect();
    let top20: Vec<String> = ranked.iter().take(20).cloned().collect();
    let bottom20: Vec<String> = ranked.iter().rev().take(20).cloned().collect();
    Ok((top20, bottom20))
}

/// Flipped RGB encoding of |real − synthetic| degree vectors: white means
/// perfect adherence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdherenceColor {
    pub entity: String,
    pub rgb: [u8; 3],
}

/// Per-entity adherence colors over the selected entities.
///
/// Componentwise absolute degree differences are rescaled by the maximum
/// difference across all selected entities and channels (truncating to the
/// 0..=255 integer grid), then flipped so identical vectors come out
/// white. Single-class (mptm) diffs replicate to all three channels.
pub fn adherence_colors(
    real: &EntityGraph,
    synth: &EntityGraph,
    entities: &[String],
) -> Result<Vec<AdherenceColor>, GraphError> {
    if real.mode != synth.mode {
        return Err(GraphError::ModeMismatch {
            real: real.mode,
            synth: synth.mode,
        });
    }
    let mut diffs: Vec<(String, Vec<u64>)> = Vec::with_capacity(entities.len());
    for entity in entities {
        let real_vec = real
            .degree_vector_for(entity, &real.classes)
            .ok_or_else(|| GraphError::MissingEntity {
                entity: entity.clone(),
                side: "real",
            })?;
        let synth_vec = synth
            .degree_vector_for(entity, &real.classes)
            .ok_or_else(|| GraphError::MissingEntity {
                entity: entity.clone(),
                side: "synthetic",
            })?;
        let diff: Vec<u64> = real_vec
            .iter()
            .zip(&synth_vec)
            .map(|(&r, &s)| r.abs_diff(s))
            .collect();
        diffs.push((entity.clone(), diff));
    }

    let max_diff = diffs
        .iter()
        .flat_map(|(_, d)| d.iter().copied())
        .max()
        .unwrap_or(0);

    Ok(diffs
        .into_iter()
        .map(|(entity, diff)| {
            let channels: Vec<u8> = diff
                .iter()
                .map(|&d| {
                    let scaled = if max_diff == 0 {
                        0.0
                    } else {
                        255.0 * d as f64 / max_diff as f64
                    };
                    255 - (scaled.floor() as u8)
                })
                .collect();
            let rgb = match channels.len() {
                1 => [channels[0]; 3],
                2 => [channels[0], channels[1], 255],
                _ => [channels[0], channels[1], channels[2]],
            };
            AdherenceColor { entity, rgb }
        })
        .collect())
}

/// CSV of adherence colors: `entity,r,g,b`.
pub fn adherence_csv(colors: &[AdherenceColor]) -> String {
    let mut out = String::from("entity,r,g,b\n");
    for c in colors {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            csv_escape(&c.entity),
            c.rgb[0],
            c.rgb[1],
            c.rgb[2]
        );
    }
    out
}
