//! Brute-force k-nearest-neighbour search.
//!
//! Exact and deterministic: ties break on the lower point index. Row
//! computations are data-parallel; each row's result depends only on its
//! own inputs, so thread count never changes the output.

use serde::{Deserialize, Serialize};

use crate::par;
use crate::providers::cosine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cosine,
    Euclidean,
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Cosine => 1.0 - cosine(a, b),
            Metric::Euclidean => a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// For each point, the indices and distances of its `k` nearest other
/// points, sorted by (distance, index).
pub fn knn(points: &[Vec<f64>], k: usize, metric: Metric) -> (Vec<Vec<usize>>, Vec<Vec<f64>>) {
    let n = points.len();
    let k = k.min(n.saturating_sub(1));
    let rows: Vec<(Vec<usize>, Vec<f64>)> = par::map_range(n, |i| {
        let mut dists: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (metric.distance(&points[i], &points[j]), j))
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distance").then(a.1.cmp(&b.1)));
        dists.truncate(k);
        let (ds, is): (Vec<f64>, Vec<usize>) = dists.into_iter().unzip();
        (is, ds)
    });
    rows.into_iter().unzip()
}
