//! Topic matching between two fitted models by greedy maximum-similarity.

use serde::{Deserialize, Serialize};

use super::FidelityError;
use crate::topic::TopicModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedTopicPair {
    pub real_id: i32,
    pub synthetic_id: i32,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicOverlap {
    pub threshold: f64,
    pub common: Vec<MatchedTopicPair>,
    pub unique_real: Vec<i32>,
    pub unique_synthetic: Vec<i32>,
}

/// Matched `(row, col, similarity)` triples plus the unmatched row and
/// column indices.
pub type MatchOutcome = (Vec<(usize, usize, f64)>, Vec<usize>, Vec<usize>);

/// Sort-then-greedy matching over a similarity matrix.
///
/// All `(row, col)` pairs are ordered by similarity descending with ties
/// broken by the id pair, then accepted greedily while both endpoints are
/// unmatched and the similarity is at least `threshold`. The total order
/// makes the result independent of input permutation.
pub fn greedy_match(similarity: &[Vec<f64>], threshold: f64) -> MatchOutcome {
    let rows = similarity.len();
    let cols = similarity.first().map(|r| r.len()).unwrap_or(0);
    let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(rows * cols);
    for (i, row) in similarity.iter().enumerate() {
        for (j, &sim) in row.iter().enumerate() {
            pairs.push((i, j, sim));
        }
    }
    pairs.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .expect("finite similarity")
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });

    let mut row_taken = vec![false; rows];
    let mut col_taken = vec![false; cols];
    let mut matched = Vec::new();
    for (i, j, sim) in pairs {
        if sim < threshold {
            break;
        }
        if !row_taken[i] && !col_taken[j] {
            row_taken[i] = true;
            col_taken[j] = true;
            matched.push((i, j, sim));
        }
    }
    let unique_rows = (0..rows).filter(|&i| !row_taken[i]).collect();
    let unique_cols = (0..cols).filter(|&j| !col_taken[j]).collect();
    (matched, unique_rows, unique_cols)
}

/// Match topics of two models by cosine similarity of their topic vectors.
pub fn topic_overlap(
    real: &TopicModel,
    synth: &TopicModel,
    threshold: f64,
) -> Result<TopicOverlap, FidelityError> {
    if real.embed_dim() != synth.embed_dim() {
        return Err(FidelityError::ProviderMismatch {
            real: real.embed_dim(),
            synth: synth.embed_dim(),
        });
    }
    let matrix: Vec<Vec<f64>> = real
        .topics()
        .iter()
        .map(|r| {
            synth
                .topics()
                .iter()
                .map(|s| r.vector.cosine(&s.vector))
                .collect()
        })
        .collect();
    let (matched, unique_rows, unique_cols) = greedy_match(&matrix, threshold);
    Ok(TopicOverlap {
        threshold,
        common: matched
            .into_iter()
            .map(|(i, j, sim)| MatchedTopicPair {
                real_id: real.topics()[i].id,
                synthetic_id: synth.topics()[j].id,
                similarity: sim,
            })
            .collect(),
        unique_real: unique_rows.into_iter().map(|i| real.topics()[i].id).collect(),
        unique_synthetic: unique_cols
            .into_iter()
            .map(|j| synth.topics()[j].id)
            .collect(),
    })
}
