//! HDBSCAN density clustering.
//!
//! Mutual-reachability distances (core distance from the min_samples-th
//! neighbour) → minimum spanning tree → single-linkage hierarchy →
//! condensed tree at min_cluster_size → excess-of-mass stability selection.
//! Points not captured by a selected cluster are noise, labelled -1.
//!
//! All ties break on point index, so labels are deterministic. Core
//! distances are data-parallel; the rest is sequential.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

use super::knn::Metric;
use super::TopicError;
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdbscanParams {
    /// Smallest group of points treated as a cluster.
    pub min_cluster_size: usize,
    /// Neighbour rank used for core distances.
    pub min_samples: usize,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        HdbscanParams {
            min_cluster_size: 10,
            min_samples: 10,
        }
    }
}

impl HdbscanParams {
    pub fn new(min_cluster_size: usize) -> Self {
        HdbscanParams {
            min_cluster_size,
            min_samples: min_cluster_size,
        }
    }
}

/// Noise label.
pub const NOISE: i32 = -1;

struct MstEdge {
    a: usize,
    b: usize,
    dist: f64,
}

struct SltNode {
    left: usize,
    right: usize,
    dist: f64,
    size: usize,
}

#[derive(Debug, Clone, Copy)]
struct CondensedNode {
    node_id: usize,
    parent_id: usize,
    /// Lambda (1/distance) at which this node separated from its parent.
    lambda: f64,
    size: usize,
}

/// Cluster with Euclidean distances in the (reduced) input space.
pub fn cluster(points: &[Vec<f64>], params: &HdbscanParams) -> Result<Vec<i32>, TopicError> {
    let n = points.len();
    if params.min_cluster_size < 2 {
        return Err(TopicError::BadParams(
            "min_cluster_size must be at least 2".into(),
        ));
    }
    if n < params.min_cluster_size {
        return Err(TopicError::TooFewPoints {
            points: n,
            needed: params.min_cluster_size,
            hint: "need at least min_cluster_size points",
        });
    }
    let dim = points[0].len();
    for row in points {
        if row.len() != dim {
            return Err(TopicError::BadParams("inconsistent point dimensions".into()));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(TopicError::NonFiniteInput);
        }
    }

    let metric = Metric::Euclidean;
    let min_samples = params.min_samples.max(1).min(n - 1);
    let core = core_distances(points, min_samples, metric);
    let mst = prim_mst(points, &core, metric);
    let slt = single_linkage_tree(n, &mst);
    let condensed = condense_tree(n, &slt, params.min_cluster_size);
    let selected = extract_eom_clusters(n, &condensed);
    Ok(label_points(n, &condensed, &selected))
}

/// Distance to each point's `min_samples`-th nearest other point.
fn core_distances(points: &[Vec<f64>], min_samples: usize, metric: Metric) -> Vec<f64> {
    let n = points.len();
    par::map_range(n, |i| {
        let mut dists: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| metric.distance(&points[i], &points[j]))
            .collect();
        dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distance"));
        dists[min_samples - 1]
    })
}

fn mutual_reachability(
    points: &[Vec<f64>],
    core: &[f64],
    metric: Metric,
    a: usize,
    b: usize,
) -> f64 {
    metric.distance(&points[a], &points[b]).max(core[a]).max(core[b])
}

/// Prim's MST over the implicit mutual-reachability graph, O(n^2).
fn prim_mst(points: &[Vec<f64>], core: &[f64], metric: Metric) -> Vec<MstEdge> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best_dist = vec![f64::INFINITY; n];
    let mut best_from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);

    let mut current = 0usize;
    for _ in 1..n {
        in_tree[current] = true;
        let mut next = usize::MAX;
        let mut next_dist = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = mutual_reachability(points, core, metric, current, j);
            if d < best_dist[j] {
                best_dist[j] = d;
                best_from[j] = current;
            }
            if best_dist[j] < next_dist {
                next_dist = best_dist[j];
                next = j;
            }
        }
        edges.push(MstEdge {
            a: best_from[next],
            b: next,
            dist: next_dist,
        });
        current = next;
    }
    edges.sort_by(|x, y| {
        x.dist
            .partial_cmp(&y.dist)
            .expect("finite distance")
            .then(x.a.cmp(&y.a))
            .then(x.b.cmp(&y.b))
    });
    edges
}

/// Merge MST edges in distance order; internal node i has id n + i.
fn single_linkage_tree(n: usize, mst: &[MstEdge]) -> Vec<SltNode> {
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    let mut component: Vec<usize> = (0..2 * n - 1).collect(); // root node id of each set
    let mut sizes = vec![1usize; 2 * n - 1];
    let mut tree = Vec::with_capacity(n - 1);

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for (i, edge) in mst.iter().enumerate() {
        let new_id = n + i;
        let ra = find(&mut parent, edge.a);
        let rb = find(&mut parent, edge.b);
        let (left, right) = (component[ra], component[rb]);
        let size = sizes[left] + sizes[right];
        tree.push(SltNode {
            left,
            right,
            dist: edge.dist,
            size,
        });
        parent[ra] = new_id;
        parent[rb] = new_id;
        component[new_id] = new_id;
        sizes[new_id] = size;
    }
    tree
}

fn slt_size(n: usize, slt: &[SltNode], node_id: usize) -> usize {
    if node_id < n {
        1
    } else {
        slt[node_id - n].size
    }
}

/// Leaves of the single-linkage subtree rooted at `node_id`.
fn slt_leaves(n: usize, slt: &[SltNode], node_id: usize) -> Vec<usize> {
    let mut queue = VecDeque::from([node_id]);
    let mut leaves = Vec::new();
    while let Some(id) = queue.pop_front() {
        if id < n {
            leaves.push(id);
        } else {
            let node = &slt[id - n];
            queue.push_back(node.left);
            queue.push_back(node.right);
        }
    }
    leaves
}

/// Collapse the single-linkage hierarchy: splits where both sides reach
/// min_cluster_size create new clusters, smaller sides fall out as points.
/// The root cluster has condensed id n; new clusters take increasing ids.
fn condense_tree(n: usize, slt: &[SltNode], min_cluster_size: usize) -> Vec<CondensedNode> {
    let root = 2 * n - 2;
    let mut new_ids = vec![usize::MAX; 2 * n - 1];
    new_ids[root] = n;
    let mut next_id = n + 1;
    let mut ignore = vec![false; 2 * n - 1];
    let mut condensed = Vec::new();

    // Top-down BFS so parents are relabelled before their children.
    let mut order = Vec::with_capacity(2 * n - 1);
    let mut queue = VecDeque::from([root]);
    while let Some(id) = queue.pop_front() {
        order.push(id);
        if id >= n {
            let node = &slt[id - n];
            queue.push_back(node.left);
            queue.push_back(node.right);
        }
    }

    for node_id in order {
        if node_id < n || ignore[node_id] {
            continue;
        }
        let node = &slt[node_id - n];
        // Duplicate points merge at distance 0; floor it so lambda stays
        // finite and stability arithmetic never sees inf - inf.
        let lambda = 1.0 / node.dist.max(1e-12);
        let left_size = slt_size(n, slt, node.left);
        let right_size = slt_size(n, slt, node.right);
        let parent = new_ids[node_id];
        debug_assert_ne!(parent, usize::MAX);

        match (left_size >= min_cluster_size, right_size >= min_cluster_size) {
            (true, true) => {
                for (child, size) in [(node.left, left_size), (node.right, right_size)] {
                    new_ids[child] = next_id;
                    condensed.push(CondensedNode {
                        node_id: next_id,
                        parent_id: parent,
                        lambda,
                        size,
                    });
                    next_id += 1;
                }
            }
            (false, false) => {
                for child in [node.left, node.right] {
                    for leaf in slt_leaves(n, slt, child) {
                        condensed.push(CondensedNode {
                            node_id: leaf,
                            parent_id: parent,
                            lambda,
                            size: 1,
                        });
                    }
                    mark_ignored(n, slt, child, &mut ignore);
                }
            }
            (true, false) => {
                new_ids[node.left] = parent;
                for leaf in slt_leaves(n, slt, node.right) {
                    condensed.push(CondensedNode {
                        node_id: leaf,
                        parent_id: parent,
                        lambda,
                        size: 1,
                    });
                }
                mark_ignored(n, slt, node.right, &mut ignore);
            }
            (false, true) => {
                new_ids[node.right] = parent;
                for leaf in slt_leaves(n, slt, node.left) {
                    condensed.push(CondensedNode {
                        node_id: leaf,
                        parent_id: parent,
                        lambda,
                        size: 1,
                    });
                }
                mark_ignored(n, slt, node.left, &mut ignore);
            }
        }
    }
    condensed
}

fn mark_ignored(n: usize, slt: &[SltNode], node_id: usize, ignore: &mut [bool]) {
    let mut queue = VecDeque::from([node_id]);
    while let Some(id) = queue.pop_front() {
        ignore[id] = true;
        if id >= n {
            let node = &slt[id - n];
            queue.push_back(node.left);
            queue.push_back(node.right);
        }
    }
}

/// Excess-of-mass selection over the condensed tree. The root cluster is
/// never selected, so an unsplittable data set comes out all noise.
fn extract_eom_clusters(n: usize, condensed: &[CondensedNode]) -> Vec<usize> {
    let max_id = condensed.iter().map(|c| c.node_id.max(c.parent_id)).max();
    let max_id = match max_id {
        Some(m) if m > n => m,
        _ => return Vec::new(),
    };

    let mut children_of: BTreeMap<usize, Vec<&CondensedNode>> = BTreeMap::new();
    for node in condensed {
        children_of.entry(node.parent_id).or_default().push(node);
    }
    let birth_lambda = |cluster: usize| -> f64 {
        if cluster == n {
            0.0
        } else {
            condensed
                .iter()
                .find(|c| c.node_id == cluster)
                .map(|c| c.lambda)
                .unwrap_or(0.0)
        }
    };

    let mut stability: BTreeMap<usize, f64> = BTreeMap::new();
    for cluster in n..=max_id {
        if cluster > n && !condensed.iter().any(|c| c.node_id == cluster) {
            continue;
        }
        let birth = birth_lambda(cluster);
        let s = children_of
            .get(&cluster)
            .map(|kids| {
                kids.iter()
                    .map(|k| (k.lambda - birth).max(0.0) * k.size as f64)
                    .sum()
            })
            .unwrap_or(0.0);
        stability.insert(cluster, s);
    }

    let mut selected: BTreeMap<usize, bool> =
        stability.keys().map(|&c| (c, false)).collect();
    let cluster_ids: Vec<usize> = stability.keys().copied().filter(|&c| c > n).collect();
    for &cluster in cluster_ids.iter().rev() {
        let child_clusters: Vec<usize> = children_of
            .get(&cluster)
            .map(|kids| {
                kids.iter()
                    .filter(|k| k.node_id >= n)
                    .map(|k| k.node_id)
                    .collect()
            })
            .unwrap_or_default();
        let combined: f64 = child_clusters
            .iter()
            .map(|c| stability.get(c).copied().unwrap_or(0.0))
            .sum();
        let own = stability.get(&cluster).copied().unwrap_or(0.0);
        if own > combined {
            selected.insert(cluster, true);
            for descendant in descendant_clusters(n, &children_of, cluster) {
                selected.insert(descendant, false);
            }
        } else {
            stability.insert(cluster, combined);
        }
    }

    let mut winners: Vec<usize> = selected
        .into_iter()
        .filter_map(|(c, keep)| keep.then_some(c))
        .collect();
    winners.sort_unstable();
    winners
}

fn descendant_clusters(
    n: usize,
    children_of: &BTreeMap<usize, Vec<&CondensedNode>>,
    cluster: usize,
) -> Vec<usize> {
    let mut out = Vec::new();
    let mut queue = VecDeque::from([cluster]);
    while let Some(id) = queue.pop_front() {
        if let Some(kids) = children_of.get(&id) {
            for kid in kids {
                if kid.node_id >= n {
                    out.push(kid.node_id);
                    queue.push_back(kid.node_id);
                }
            }
        }
    }
    out
}

fn label_points(n: usize, condensed: &[CondensedNode], selected: &[usize]) -> Vec<i32> {
    let mut labels = vec![NOISE; n];
    let mut children_of: BTreeMap<usize, Vec<&CondensedNode>> = BTreeMap::new();
    for node in condensed {
        children_of.entry(node.parent_id).or_default().push(node);
    }
    for (label, &cluster) in selected.iter().enumerate() {
        let mut queue = VecDeque::from([cluster]);
        while let Some(id) = queue.pop_front() {
            if let Some(kids) = children_of.get(&id) {
                for kid in kids {
                    if kid.node_id < n {
                        labels[kid.node_id] = label as i32;
                    } else {
                        queue.push_back(kid.node_id);
                    }
                }
            }
        }
    }
    labels
}
