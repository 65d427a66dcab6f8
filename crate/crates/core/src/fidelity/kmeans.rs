//! Seeded K-means with k-means++ initialization, and the 2-D centroid
//! projection used for plot emission.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FidelityError;
use crate::par;
use crate::providers::EmbeddingVector;
use crate::seeds;
use crate::topic::{umap, UmapParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeans {
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    pub inertia: f64,
}

const RESTARTS: usize = 10;
const MAX_ITER: usize = 300;
const REL_TOL: f64 = 1e-6;

/// Lloyd's algorithm with k-means++ seeding, 10 restarts, keeping the run
/// with the lowest inertia. Deterministic for a fixed seed.
///
/// Tiny two-cluster problems defeat k-means++ restarts surprisingly often
/// (the D² weighting concentrates the seeds), so for k = 2 over at most 24
/// points every index pair is also tried as a seed.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeans, FidelityError> {
    if k == 0 {
        return Err(FidelityError::BadK);
    }
    if points.is_empty() {
        return Err(FidelityError::EmptyCorpus);
    }
    let k = k.min(points.len());
    let mut best: Option<KMeans> = None;
    let consider = |run: KMeans, best: &mut Option<KMeans>| {
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            *best = Some(run);
        }
    };
    for restart in 0..RESTARTS {
        let mut rng = seeds::rng_for(seed, "kmeans", restart as u64);
        let centroids = plus_plus_init(points, k, &mut rng);
        consider(lloyd(points, centroids), &mut best);
    }
    if k == 2 && points.len() <= 24 {
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let centroids = vec![points[i].clone(), points[j].clone()];
                consider(lloyd(points, centroids), &mut best);
            }
        }
    }
    Ok(best.expect("at least one restart"))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())].clone());
    let mut weights: Vec<f64> = vec![0.0; points.len()];
    while centroids.len() < k {
        let mut total = 0.0;
        for (w, p) in weights.iter_mut().zip(points) {
            *w = centroids
                .iter()
                .map(|c| squared_distance(p, c))
                .fold(f64::INFINITY, f64::min);
            total += *w;
        }
        let chosen = if total > 0.0 {
            let target = rng.random_range(0.0..total);
            let mut acc = 0.0;
            let mut pick = points.len() - 1;
            for (i, &w) in weights.iter().enumerate() {
                acc += w;
                if acc > target {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // All remaining points coincide with a centroid.
            rng.random_range(0..points.len())
        };
        centroids.push(points[chosen].clone());
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> KMeans {
    let dim = points[0].len();
    let k = centroids.len();
    let mut assignment = vec![0usize; points.len()];
    let mut inertia = f64::INFINITY;

    for _ in 0..MAX_ITER {
        // Assignment step; ties go to the lower centroid index.
        let assigned: Vec<(usize, f64)> = par::map_slice(points, |p| {
            let mut best = (0usize, f64::INFINITY);
            for (c, centroid) in centroids.iter().enumerate() {
                let d = squared_distance(p, centroid);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        });
        let mut new_inertia = 0.0;
        for (i, &(c, d)) in assigned.iter().enumerate() {
            assignment[i] = c;
            new_inertia += d;
        }

        // Update step.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seat an empty centroid on the point farthest from its
                // assigned centroid; lowest index wins ties.
                let (far_idx, _) = assigned
                    .iter()
                    .enumerate()
                    .fold((0usize, f64::NEG_INFINITY), |acc, (i, &(_, d))| {
                        if d > acc.1 {
                            (i, d)
                        } else {
                            acc
                        }
                    });
                centroids[c] = points[far_idx].clone();
            } else {
                for (cv, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *cv = s / counts[c] as f64;
                }
            }
        }

        let improved = inertia.is_infinite() || inertia - new_inertia > REL_TOL * inertia;
        inertia = new_inertia;
        if !improved {
            break;
        }
    }
    KMeans {
        centroids,
        assignment,
        inertia,
    }
}

/// 2-D projected K-means centroids of both corpora, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidProjection {
    /// (corpus label, x, y) rows: all real centroids, then all synthetic.
    pub rows: Vec<(String, f64, f64)>,
    pub k_real: usize,
    pub k_synthetic: usize,
}

/// Cluster each corpus's embeddings with seeded K-means and project the
/// centroid union to 2-D with one joint UMAP fit. K shrinks to the corpus
/// size with a warning when a corpus is smaller than K.
pub fn centroid_projection(
    real: &[EmbeddingVector],
    synth: &[EmbeddingVector],
    k: usize,
    seed: u64,
) -> Result<CentroidProjection, FidelityError> {
    if real.is_empty() || synth.is_empty() {
        return Err(FidelityError::EmptyCorpus);
    }
    if k == 0 {
        return Err(FidelityError::BadK);
    }
    let k_real = k.min(real.len());
    let k_synth = k.min(synth.len());
    if k_real < k || k_synth < k {
        log::warn!(
            "reducing K from {k} to {k_real}/{k_synth}: corpora have {} and {} posts",
            real.len(),
            synth.len()
        );
    }
    let real_points: Vec<Vec<f64>> = real.iter().map(|v| v.values().to_vec()).collect();
    let synth_points: Vec<Vec<f64>> = synth.iter().map(|v| v.values().to_vec()).collect();
    let real_km = kmeans(&real_points, k_real, seeds::child_seed(seed, "centroids", 0))?;
    let synth_km = kmeans(&synth_points, k_synth, seeds::child_seed(seed, "centroids", 1))?;

    let mut union: Vec<Vec<f64>> = Vec::with_capacity(k_real + k_synth);
    union.extend(real_km.centroids.iter().cloned());
    union.extend(synth_km.centroids.iter().cloned());
    let params = UmapParams {
        n_components: 2,
        ..Default::default()
    }
    .clamped_for(union.len());
    let projected = umap::reduce(&union, &params, seeds::child_seed(seed, "projection", 0))?;

    let mut rows = Vec::with_capacity(projected.len());
    for (i, point) in projected.iter().enumerate() {
        let label = if i < k_real { "real" } else { "synthetic" };
        rows.push((label.to_string(), point[0], point[1]));
    }
    Ok(CentroidProjection {
        rows,
        k_real,
        k_synthetic: k_synth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_groups_recover_group_means() {
        // K identical-embedding groups of equal size: centroids must equal
        // the group means exactly.
        let mut points = Vec::new();
        for group in 0..4 {
            for _ in 0..5 {
                points.push(vec![group as f64 * 10.0, 1.0]);
            }
        }
        let result = kmeans(&points, 4, 7).unwrap();
        assert!(result.inertia.abs() < 1e-18);
        let mut centroids = result.centroids.clone();
        centroids.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        for (group, c) in centroids.iter().enumerate() {
            assert_eq!(c, &vec![group as f64 * 10.0, 1.0]);
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let points: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i % 7) as f64, (i % 3) as f64])
            .collect();
        let a = kmeans(&points, 3, 42).unwrap();
        let b = kmeans(&points, 3, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_blobs_optimal_partition() {
        let mut points = Vec::new();
        for i in 0..5 {
            points.push(vec![0.0 + 0.01 * i as f64, 0.0]);
            points.push(vec![10.0 + 0.01 * i as f64, 0.0]);
        }
        let result = kmeans(&points, 2, 3).unwrap();
        // Each blob is one cluster.
        let first = result.assignment[0];
        for (i, &a) in result.assignment.iter().enumerate() {
            if i % 2 == 0 {
                assert_eq!(a, first);
            } else {
                assert_ne!(a, first);
            }
        }
    }

    #[test]
    fn k_larger_than_n_is_clamped() {
        let points = vec![vec![0.0], vec![1.0]];
        let result = kmeans(&points, 50, 1).unwrap();
        assert_eq!(result.centroids.len(), 2);
    }

    #[test]
    fn projection_rows_label_both_corpora() {
        let real: Vec<EmbeddingVector> = (0..12)
            .map(|i| EmbeddingVector::new(vec![i as f64, 1.0, 0.0]).normalized())
            .collect();
        let synth: Vec<EmbeddingVector> = (0..8)
            .map(|i| EmbeddingVector::new(vec![1.0, i as f64, 0.5]).normalized())
            .collect();
        let projection = centroid_projection(&real, &synth, 4, 9).unwrap();
        assert_eq!(projection.k_real, 4);
        assert_eq!(projection.k_synthetic, 4);
        assert_eq!(projection.rows.len(), 8);
        assert_eq!(projection.rows[0].0, "real");
        assert_eq!(projection.rows[7].0, "synthetic");
    }

    #[test]
    fn projection_deterministic() {
        let real: Vec<EmbeddingVector> = (0..10)
            .map(|i| EmbeddingVector::new(vec![i as f64, 2.0]).normalized())
            .collect();
        let synth: Vec<EmbeddingVector> = (0..10)
            .map(|i| EmbeddingVector::new(vec![2.0, i as f64]).normalized())
            .collect();
        let a = centroid_projection(&real, &synth, 3, 5).unwrap();
        let b = centroid_projection(&real, &synth, 3, 5).unwrap();
        assert_eq!(a, b);
    }
}
