//! Cross-corpus embedding similarity and recall counts.

use serde::{Deserialize, Serialize};

use super::FidelityError;
use crate::corpus::Corpus;
use crate::par;
use crate::providers::{Embedder, EmbeddingVector};

/// Recall band of one synthetic post's best real match.
///
/// `high` is strict (`max > high`); the fair band is closed on both ends
/// (`fair.0 <= max <= fair.1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityBand {
    High,
    Fair,
    None,
}

pub fn band_of(max_similarity: f64, high: f64, fair: (f64, f64)) -> SimilarityBand {
    if max_similarity > high {
        SimilarityBand::High
    } else if max_similarity >= fair.0 && max_similarity <= fair.1 {
        SimilarityBand::Fair
    } else {
        SimilarityBand::None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityStats {
    /// Mean cosine over all real × synthetic cross pairs.
    pub average: f64,
    /// Synthetic posts whose best real match exceeds the high threshold.
    pub high_count: usize,
    /// Synthetic posts whose best real match falls in the fair band.
    pub fair_count: usize,
    pub real_count: usize,
    pub synthetic_count: usize,
    pub high_threshold: f64,
    pub fair_band: (f64, f64),
}

/// Similarity statistics over pre-computed embeddings.
///
/// Rows (synthetic posts) are processed in parallel but each row reduces
/// sequentially over the real posts and row results are folded in index
/// order, so thread count never changes the output.
pub fn similarity_stats(
    real: &[EmbeddingVector],
    synth: &[EmbeddingVector],
    high: f64,
    fair: (f64, f64),
) -> SimilarityStats {
    let rows: Vec<(f64, f64)> = par::map_slice(synth, |s| {
        let mut sum = 0.0;
        let mut best = f64::NEG_INFINITY;
        for r in real {
            let sim = s.cosine(r);
            sum += sim;
            if sim > best {
                best = sim;
            }
        }
        (sum, best)
    });
    let mut total = 0.0;
    let mut high_count = 0;
    let mut fair_count = 0;
    for (sum, best) in &rows {
        total += sum;
        match band_of(*best, high, fair) {
            SimilarityBand::High => high_count += 1,
            SimilarityBand::Fair => fair_count += 1,
            SimilarityBand::None => {}
        }
    }
    let pairs = (real.len() * synth.len()) as f64;
    SimilarityStats {
        average: if pairs > 0.0 { total / pairs } else { 0.0 },
        high_count,
        fair_count,
        real_count: real.len(),
        synthetic_count: synth.len(),
        high_threshold: high,
        fair_band: fair,
    }
}

/// Embed both corpora and compute cross-pair similarity statistics.
pub fn embedding_similarity(
    real: &Corpus,
    synth: &Corpus,
    embedder: &Embedder,
    high: f64,
    fair: (f64, f64),
) -> Result<SimilarityStats, FidelityError> {
    if real.is_empty() || synth.is_empty() {
        return Err(FidelityError::EmptyCorpus);
    }
    let real_texts: Vec<String> = real.posts().iter().map(|p| p.text.clone()).collect();
    let synth_texts: Vec<String> = synth.posts().iter().map(|p| p.text.clone()).collect();
    let real_vectors = embedder.embed_batch(&real_texts)?;
    let synth_vectors = embedder.embed_batch(&synth_texts)?;
    Ok(similarity_stats(&real_vectors, &synth_vectors, high, fair))
}
