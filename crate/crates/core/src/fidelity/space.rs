//! Topic-space distances in a jointly fitted 2-D reduction.
//!
//! Both models' topic vectors are reduced together with one UMAP fit, so
//! the coordinate frames are comparable; distances are then all synthetic ×
//! real pairs in that shared plane.

use serde::{Deserialize, Serialize};

use super::FidelityError;
use crate::topic::{umap, TopicModel, UmapParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSpaceStats {
    pub avg: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub pair_count: usize,
}

/// Reduce the union of topic vectors to 2-D and measure synthetic-to-real
/// Euclidean distances.
pub fn topic_space_distance(
    real: &TopicModel,
    synth: &TopicModel,
    seed: u64,
) -> Result<TopicSpaceStats, FidelityError> {
    if real.embed_dim() != synth.embed_dim() {
        return Err(FidelityError::ProviderMismatch {
            real: real.embed_dim(),
            synth: synth.embed_dim(),
        });
    }
    let n_real = real.topics().len();
    let n_synth = synth.topics().len();
    let total = n_real + n_synth;
    if total < 2 || n_real == 0 || n_synth == 0 {
        return Err(FidelityError::TooFewTopics {
            needed: 2,
            real: n_real,
            synth: n_synth,
        });
    }

    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(total);
    for t in real.topics().iter().chain(synth.topics()) {
        vectors.push(t.vector.values().to_vec());
    }

    // Bit-identical vectors share one point in the fit, so coincident
    // topics stay coincident in the plane.
    let mut unique: Vec<Vec<f64>> = Vec::new();
    let mut slot_of: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
    let mut assignment = Vec::with_capacity(total);
    for v in &vectors {
        let key: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
        let slot = *slot_of.entry(key).or_insert_with(|| {
            unique.push(v.clone());
            unique.len() - 1
        });
        assignment.push(slot);
    }

    let reduced_unique = if unique.len() == 1 {
        vec![vec![0.0, 0.0]]
    } else {
        let params = UmapParams {
            n_components: 2,
            ..Default::default()
        }
        .clamped_for(unique.len());
        umap::reduce(&unique, &params, seed)?
    };
    let reduced: Vec<Vec<f64>> = assignment
        .iter()
        .map(|&slot| reduced_unique[slot].clone())
        .collect();
    let (real_points, synth_points) = reduced.split_at(n_real);
    Ok(topic_space_stats_of(real_points, synth_points))
}

/// Distance statistics between two 2-D point sets, all cross pairs.
pub fn topic_space_stats_of(real: &[Vec<f64>], synth: &[Vec<f64>]) -> TopicSpaceStats {
    let mut distances = Vec::with_capacity(real.len() * synth.len());
    for s in synth {
        for r in real {
            let d = s
                .iter()
                .zip(r)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            distances.push(d);
        }
    }
    let count = distances.len() as f64;
    let avg = distances.iter().sum::<f64>() / count;
    let var = distances.iter().map(|d| (d - avg) * (d - avg)).sum::<f64>() / count;
    let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let max = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    TopicSpaceStats {
        avg,
        std: var.sqrt(),
        min,
        max,
        pair_count: distances.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::EmbeddingVector;
    use crate::topic::{Topic, TopicModelParams};

    fn model_with_vectors(vectors: &[Vec<f64>]) -> TopicModel {
        let dim = vectors[0].len();
        let topics: Vec<Topic> = vectors
            .iter()
            .enumerate()
            .map(|(i, v)| Topic {
                id: i as i32,
                size: 1,
                keywords: Vec::new(),
                member_post_ids: vec![format!("p{i}")],
                vector: EmbeddingVector::new(v.clone()).normalized(),
            })
            .collect();
        TopicModel::from_parts(
            0,
            "mock-embed",
            dim,
            TopicModelParams::default(),
            vec![],
            vec![],
            topics,
            Vec::new(),
            Vec::new(),
        )
        .unwrap()
    }

    #[test]
    fn coincident_topics_have_zero_min() {
        let vectors = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let a = model_with_vectors(&vectors);
        let b = model_with_vectors(&vectors);
        let stats = topic_space_distance(&a, &b, 3).unwrap();
        // Identical vectors land on identical coordinates in the joint fit.
        assert!(stats.min.abs() < 1e-9, "min = {}", stats.min);
        assert!(stats.max >= stats.avg && stats.avg >= stats.min);
    }

    #[test]
    fn single_pair_degenerates() {
        let a = model_with_vectors(&[vec![1.0, 0.0]]);
        let b = model_with_vectors(&[vec![0.0, 1.0]]);
        let stats = topic_space_distance(&a, &b, 1).unwrap();
        assert_eq!(stats.pair_count, 1);
        assert_eq!(stats.avg, stats.min);
        assert_eq!(stats.avg, stats.max);
        assert_eq!(stats.std, 0.0);
    }

    #[test]
    fn too_few_topics_rejected() {
        let a = model_with_vectors(&[vec![1.0, 0.0]]);
        let empty = TopicModel::from_parts(
            0,
            "mock-embed",
            2,
            TopicModelParams::default(),
            vec![],
            vec![],
            vec![],
            Vec::new(),
            Vec::new(),
        )
        .unwrap();
        assert!(matches!(
            topic_space_distance(&a, &empty, 1),
            Err(FidelityError::TooFewTopics { .. })
        ));
    }

    #[test]
    fn stats_of_known_points() {
        let real = vec![vec![0.0, 0.0]];
        let synth = vec![vec![3.0, 4.0], vec![0.0, 0.0]];
        let stats = topic_space_stats_of(&real, &synth);
        assert_eq!(stats.min, 0.0);
        assert_eq!(stats.max, 5.0);
        assert_eq!(stats.avg, 2.5);
        assert_eq!(stats.std, 2.5);
    }
}
