//! Stand-alone DBSCAN with a pluggable distance function.
//!
//! The neighbourhood of a point is the closed ball `d(p, q) <= eps` and
//! `min_pts` counts the query point itself, following the original
//! formulation (several library implementations count neighbours only,
//! which shifts every density test by one).
//!
//! There is no spatial index: the composite consumer metric admits no cheap
//! embedding, so neighbourhood queries are linear scans, optionally served
//! from a precomputed upper-triangular distance cache when the configured
//! memory budget allows.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// DBSCAN parameters. `min_pts` includes the query point itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbscanParams {
    pub eps: f64,
    pub min_pts: usize,
    /// Upper bound in bytes for the optional pairwise-distance cache.
    /// `None` (the default) disables caching and recomputes distances.
    pub cache_budget_bytes: Option<usize>,
}

impl Default for DbscanParams {
    fn default() -> Self {
        Self {
            eps: 0.04,
            min_pts: 10,
            cache_budget_bytes: None,
        }
    }
}

/// Role a point ended up with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointRole {
    Core,
    Border,
    Noise,
}

impl PointRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointRole::Core => "core",
            PointRole::Border => "border",
            PointRole::Noise => "noise",
        }
    }
}

/// Per-item cluster membership and role. Cluster ids are dense, `0..k`,
/// ordered by the index of each cluster's founding core point. Core points
/// always carry a cluster id; noise points never do.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub clusters: Vec<Option<usize>>,
    pub roles: Vec<PointRole>,
    pub cluster_count: usize,
}

impl ClusterAssignment {
    pub fn noise_count(&self) -> usize {
        self.clusters.iter().filter(|c| c.is_none()).count()
    }
}

enum DistanceSource {
    Direct,
    Cached(Vec<f64>),
}

struct PairwiseDistances<'a, T, D> {
    items: &'a [T],
    distance: D,
    source: DistanceSource,
}

impl<'a, T, D: Fn(&T, &T) -> f64> PairwiseDistances<'a, T, D> {
    fn new(items: &'a [T], distance: D, budget: Option<usize>) -> Self {
        let n = items.len();
        let source = match budget {
            Some(budget) if n >= 2 && n * (n - 1) / 2 <= budget / 8 => {
                let mut cache = Vec::with_capacity(n * (n - 1) / 2);
                for i in 0..n {
                    for j in (i + 1)..n {
                        cache.push(distance(&items[i], &items[j]));
                    }
                }
                DistanceSource::Cached(cache)
            }
            _ => DistanceSource::Direct,
        };
        Self {
            items,
            distance,
            source,
        }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match &self.source {
            DistanceSource::Direct => (self.distance)(&self.items[i], &self.items[j]),
            DistanceSource::Cached(cache) => {
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let n = self.items.len();
                cache[lo * (2 * n - lo - 1) / 2 + (hi - lo - 1)]
            }
        }
    }

    /// Indices within the closed eps-ball around `i`, ascending, self included.
    fn neighbourhood(&self, i: usize, eps: f64) -> Vec<usize> {
        (0..self.items.len())
            .filter(|&j| self.get(i, j) <= eps)
            .collect()
    }
}

/// Runs DBSCAN over an indexed collection with an arbitrary symmetric,
/// non-negative distance function. Deterministic: points are visited in
/// ascending index order and a border point reachable from several clusters
/// joins the first cluster that reaches it.
pub fn dbscan<T, D>(items: &[T], distance: D, params: &DbscanParams) -> ClusterAssignment
where
    D: Fn(&T, &T) -> f64,
{
    let n = items.len();
    let distances = PairwiseDistances::new(items, distance, params.cache_budget_bytes);

    let mut clusters: Vec<Option<usize>> = vec![None; n];
    let mut roles = vec![PointRole::Noise; n];
    let mut visited = vec![false; n];
    let mut cluster_count = 0;

    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let seeds = distances.neighbourhood(start, params.eps);
        if seeds.len() < params.min_pts {
            continue; // noise unless a later expansion reaches it
        }

        let cluster_id = cluster_count;
        cluster_count += 1;
        clusters[start] = Some(cluster_id);
        roles[start] = PointRole::Core;

        let mut queue: VecDeque<usize> = seeds.into();
        while let Some(point) = queue.pop_front() {
            if clusters[point].is_none() {
                clusters[point] = Some(cluster_id);
                roles[point] = PointRole::Border;
            }
            if visited[point] {
                continue;
            }
            visited[point] = true;
            let reachable = distances.neighbourhood(point, params.eps);
            if reachable.len() >= params.min_pts {
                roles[point] = PointRole::Core;
                queue.extend(reachable);
            }
        }
    }

    ClusterAssignment {
        clusters,
        roles,
        cluster_count,
    }
}
