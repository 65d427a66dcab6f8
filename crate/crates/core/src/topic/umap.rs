//! UMAP dimensionality reduction.
//!
//! Pipeline: exact kNN graph → fuzzy simplicial set (smoothed membership
//! strengths, symmetrized with the probabilistic t-conorm) → negative-
//! sampling SGD layout over a fixed number of epochs.
//!
//! The layout loop is sequential and all randomness comes from one seeded
//! generator, so output is a pure function of (input, params, seed). Only
//! the kNN stage is data-parallel.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::knn::{knn, Metric};
use super::TopicError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmapParams {
    pub n_neighbors: usize,
    pub n_components: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub n_epochs: usize,
    pub negative_sample_rate: usize,
    pub learning_rate: f64,
    pub metric: Metric,
}

impl Default for UmapParams {
    fn default() -> Self {
        UmapParams {
            n_neighbors: 15,
            n_components: 5,
            min_dist: 0.1,
            spread: 1.0,
            n_epochs: 200,
            negative_sample_rate: 5,
            learning_rate: 1.0,
            metric: Metric::Cosine,
        }
    }
}

impl UmapParams {
    pub fn for_components(n_components: usize) -> Self {
        UmapParams {
            n_components,
            ..Default::default()
        }
    }

    /// Shrink `n_neighbors` to fit a small point set.
    pub fn clamped_for(mut self, n_points: usize) -> Self {
        self.n_neighbors = self.n_neighbors.min(n_points.saturating_sub(1)).max(1);
        self
    }
}

const SMOOTH_K_TOLERANCE: f64 = 1e-5;
const MIN_K_DIST_SCALE: f64 = 1e-3;
const GRAD_CLIP: f64 = 4.0;

/// Reduce `data` to `params.n_components` dimensions.
pub fn reduce(data: &[Vec<f64>], params: &UmapParams, seed: u64) -> Result<Vec<Vec<f64>>, TopicError> {
    let n = data.len();
    if n < params.n_neighbors + 1 {
        return Err(TopicError::TooFewPoints {
            points: n,
            needed: params.n_neighbors + 1,
            hint: "reduce n_neighbors to at most points - 1",
        });
    }
    if params.n_components == 0 {
        return Err(TopicError::BadParams("n_components must be >= 1".into()));
    }
    for row in data {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(TopicError::NonFiniteInput);
        }
    }

    let k = params.n_neighbors;
    let (knn_indices, knn_dists) = knn(data, k, params.metric);
    let (sigmas, rhos) = smooth_knn_dist(&knn_dists, k);
    let edges = fuzzy_simplicial_set(&knn_indices, &knn_dists, &sigmas, &rhos);
    let (a, b) = fit_curve_params(params.min_dist, params.spread);
    let embedding = optimize_layout(n, &edges, params, a, b, seed);
    Ok(embedding)
}

/// Per-point smooth-kNN calibration: rho is the distance to the nearest
/// neighbour; sigma solves sum_j exp(-max(0, d_ij - rho_i)/sigma_i) = log2(k)
/// by bisection.
fn smooth_knn_dist(knn_dists: &[Vec<f64>], k: usize) -> (Vec<f64>, Vec<f64>) {
    let target = (k as f64).log2().max(SMOOTH_K_TOLERANCE);
    let mut sigmas = Vec::with_capacity(knn_dists.len());
    let mut rhos = Vec::with_capacity(knn_dists.len());
    for dists in knn_dists {
        let rho = dists
            .iter()
            .copied()
            .find(|&d| d > 0.0)
            .unwrap_or(0.0);
        let mut lo = 0.0_f64;
        let mut hi = f64::INFINITY;
        let mut mid = 1.0_f64;
        for _ in 0..64 {
            let psum: f64 = dists
                .iter()
                .map(|&d| {
                    let adjusted = d - rho;
                    if adjusted > 0.0 {
                        (-adjusted / mid).exp()
                    } else {
                        1.0
                    }
                })
                .sum();
            if (psum - target).abs() < SMOOTH_K_TOLERANCE {
                break;
            }
            if psum > target {
                hi = mid;
                mid = (lo + hi) / 2.0;
            } else {
                lo = mid;
                mid = if hi.is_infinite() { mid * 2.0 } else { (lo + hi) / 2.0 };
            }
        }
        let mean_dist = if dists.is_empty() {
            0.0
        } else {
            dists.iter().sum::<f64>() / dists.len() as f64
        };
        sigmas.push(mid.max(MIN_K_DIST_SCALE * mean_dist.max(SMOOTH_K_TOLERANCE)));
        rhos.push(rho);
    }
    (sigmas, rhos)
}

/// Directed membership strengths symmetrized with w + wT - w∘wT, returned
/// as a deterministically ordered edge list.
fn fuzzy_simplicial_set(
    knn_indices: &[Vec<usize>],
    knn_dists: &[Vec<f64>],
    sigmas: &[f64],
    rhos: &[f64],
) -> Vec<(usize, usize, f64)> {
    let mut directed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, (indices, dists)) in knn_indices.iter().zip(knn_dists).enumerate() {
        for (&j, &d) in indices.iter().zip(dists) {
            let w = if d <= rhos[i] {
                1.0
            } else {
                (-(d - rhos[i]) / sigmas[i]).exp()
            };
            directed.insert((i, j), w);
        }
    }
    let mut symmetric: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(i, j), &w_ij) in &directed {
        if i >= j {
            // Handle each unordered pair once, from its (lo, hi) key.
            continue;
        }
        let w_ji = directed.get(&(j, i)).copied().unwrap_or(0.0);
        let w = w_ij + w_ji - w_ij * w_ji;
        if w > 0.0 {
            symmetric.insert((i, j), w);
        }
    }
    for (&(j, i), &w_ji) in &directed {
        if j <= i {
            continue;
        }
        // Pairs only present in the (hi, lo) direction.
        if !directed.contains_key(&(i, j))
            && w_ji > 0.0 {
                symmetric.insert((i, j), w_ji);
            }
    }
    symmetric.into_iter().map(|((i, j), w)| (i, j, w)).collect()
}

/// Fit the curve 1/(1 + a x^(2b)) to the target membership function defined
/// by min_dist and spread, by Levenberg-Marquardt least squares.
pub(crate) fn fit_curve_params(min_dist: f64, spread: f64) -> (f64, f64) {
    let xs: Vec<f64> = (1..=300).map(|i| i as f64 * (3.0 * spread) / 300.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            if x < min_dist {
                1.0
            } else {
                (-(x - min_dist) / spread).exp()
            }
        })
        .collect();
    let sse_of = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let f = 1.0 / (1.0 + a * x.powf(2.0 * b));
                (y - f) * (y - f)
            })
            .sum()
    };

    let mut a = 1.0_f64;
    let mut b = 1.0_f64;
    let mut lambda = 1e-3_f64;
    let mut sse = sse_of(a, b);
    for _ in 0..300 {
        let mut jtj = [[0.0_f64; 2]; 2];
        let mut jtr = [0.0_f64; 2];
        for (&x, &y) in xs.iter().zip(&ys) {
            let x2b = x.powf(2.0 * b);
            let denom = 1.0 + a * x2b;
            let f = 1.0 / denom;
            let r = y - f;
            let df_da = -x2b / (denom * denom);
            let df_db = -2.0 * a * x2b * x.ln() / (denom * denom);
            jtj[0][0] += df_da * df_da;
            jtj[0][1] += df_da * df_db;
            jtj[1][0] += df_db * df_da;
            jtj[1][1] += df_db * df_db;
            jtr[0] += df_da * r;
            jtr[1] += df_db * r;
        }
        let a00 = jtj[0][0] * (1.0 + lambda);
        let a11 = jtj[1][1] * (1.0 + lambda);
        let det = a00 * a11 - jtj[0][1] * jtj[1][0];
        if det.abs() < 1e-30 {
            break;
        }
        let da = (a11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
        let db = (a00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
        let na = (a + da).clamp(1e-3, 1e3);
        let nb = (b + db).clamp(1e-3, 1e3);
        let nsse = sse_of(na, nb);
        if nsse < sse {
            a = na;
            b = nb;
            sse = nsse;
            lambda = (lambda / 9.0).max(1e-9);
        } else {
            lambda = (lambda * 11.0).min(1e9);
        }
        if da.abs() < 1e-12 && db.abs() < 1e-12 {
            break;
        }
    }
    (a, b)
}

fn optimize_layout(
    n: usize,
    edges: &[(usize, usize, f64)],
    params: &UmapParams,
    a: f64,
    b: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    let dim = params.n_components;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut embedding: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect();
    if edges.is_empty() {
        return embedding;
    }

    let n_epochs = params.n_epochs.max(1);
    let w_max = edges.iter().map(|e| e.2).fold(f64::MIN, f64::max);
    // Both directions of every pair, so every endpoint takes its own
    // attraction and negative-sampling steps; edges too weak to be sampled
    // even once are dropped up front.
    let kept: Vec<(usize, usize, f64)> = edges
        .iter()
        .filter(|e| e.2 >= w_max / n_epochs as f64)
        .flat_map(|&(i, j, w)| [(i, j, w), (j, i, w)])
        .collect();
    let epochs_per_sample: Vec<f64> = kept.iter().map(|e| w_max / e.2).collect();
    let epochs_per_negative: Vec<f64> = epochs_per_sample
        .iter()
        .map(|e| e / params.negative_sample_rate.max(1) as f64)
        .collect();
    let mut next_sample = epochs_per_sample.clone();
    let mut next_negative: Vec<f64> = epochs_per_negative.clone();

    let gamma = 1.0; // repulsion strength
    for epoch in 1..=n_epochs {
        let alpha = params.learning_rate * (1.0 - (epoch - 1) as f64 / n_epochs as f64);
        let epoch_f = epoch as f64;
        for (e, &(head, tail, _)) in kept.iter().enumerate() {
            if next_sample[e] > epoch_f {
                continue;
            }
            attract(&mut embedding, head, tail, a, b, alpha);
            next_sample[e] += epochs_per_sample[e];

            let n_neg = ((epoch_f - next_negative[e]) / epochs_per_negative[e]).max(0.0) as usize;
            for _ in 0..n_neg {
                let other = rng.random_range(0..n);
                if other == head {
                    continue;
                }
                repel(&mut embedding, head, other, a, b, gamma, alpha);
            }
            next_negative[e] += n_neg as f64 * epochs_per_negative[e];
        }
    }

    for row in &mut embedding {
        for v in row.iter_mut() {
            if !v.is_finite() {
                *v = 0.0;
            }
        }
    }
    embedding
}

fn attract(embedding: &mut [Vec<f64>], head: usize, tail: usize, a: f64, b: f64, alpha: f64) {
    let d2: f64 = embedding[head]
        .iter()
        .zip(&embedding[tail])
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    if d2 <= 0.0 {
        return;
    }
    let coeff = (-2.0 * a * b * d2.powf(b - 1.0)) / (a * d2.powf(b) + 1.0);
    for d in 0..embedding[head].len() {
        let grad = (coeff * (embedding[head][d] - embedding[tail][d])).clamp(-GRAD_CLIP, GRAD_CLIP);
        embedding[head][d] += alpha * grad;
        embedding[tail][d] -= alpha * grad;
    }
}

#[allow(clippy::needless_range_loop)]
fn repel(
    embedding: &mut [Vec<f64>],
    head: usize,
    other: usize,
    a: f64,
    b: f64,
    gamma: f64,
    alpha: f64,
) {
    let d2: f64 = embedding[head]
        .iter()
        .zip(&embedding[other])
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let dim = embedding[head].len();
    if d2 > 0.0 {
        let coeff = (2.0 * gamma * b) / ((0.001 + d2) * (a * d2.powf(b) + 1.0));
        for d in 0..dim {
            let grad =
                (coeff * (embedding[head][d] - embedding[other][d])).clamp(-GRAD_CLIP, GRAD_CLIP);
            embedding[head][d] += alpha * grad;
        }
    } else {
        // Coincident points: push along the first axis to break the tie.
        embedding[head][0] += alpha * GRAD_CLIP;
    }
}
