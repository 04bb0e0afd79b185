//! Node-level centrality scores on a [`DirectedCountNetwork`].
//!
//! Paths are counted in unweighted steps: an arc `i -> j` exists iff `T_ij > 0`.

use std::collections::VecDeque;

use super::network::{DirectedCountNetwork, Direction};
use crate::scalar::Real;

/// Per-node degree plus the Freeman centralization of the degree sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeScores<T> {
    pub scores: Vec<u64>,
    pub centralization: T,
}

/// Number of distinct counterparts with a positive count in `direction`.
///
/// Centralization is `sum_v (max - score(v)) / (N - 1)^2`, which is 1 for a
/// star pointing at (or away from) a single hub and 0 when `N < 2`.
pub fn degree_scores<T: Real>(net: &DirectedCountNetwork, direction: Direction) -> DegreeScores<T> {
    let mut scores = vec![0u64; net.len()];
    for (i, j, _) in net.arcs() {
        match direction {
            Direction::Out => scores[i] += 1,
            Direction::In => scores[j] += 1,
        }
    }
    let n = net.len();
    let centralization = if n < 2 {
        T::zero()
    } else {
        let max = scores.iter().copied().max().unwrap_or(0);
        let spread: u64 = scores.iter().map(|&s| max - s).sum();
        T::of(spread as f64) / T::of(((n - 1) * (n - 1)) as f64)
    };
    DegreeScores {
        scores,
        centralization,
    }
}

/// Total count on arcs incident to each node in `direction`.
pub fn strength_scores(net: &DirectedCountNetwork, direction: Direction) -> Vec<u64> {
    let mut scores = vec![0u64; net.len()];
    for (i, j, c) in net.arcs() {
        match direction {
            Direction::Out => scores[i] += c,
            Direction::In => scores[j] += c,
        }
    }
    scores
}

fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].expect("queued nodes have a distance");
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Closeness over the reachable set.
///
/// For node `v` with `R` reachable nodes at total distance `S`,
/// `closeness(v) = (R / S) * (R / (N - 1))`. `Out` follows paths leaving `v`,
/// `In` follows paths arriving at `v`. Nodes reaching nobody score 0.
pub fn closeness_scores<T: Real>(net: &DirectedCountNetwork, direction: Direction) -> Vec<T> {
    let n = net.len();
    let adj = net.adjacency(direction);
    (0..n)
        .map(|v| {
            let dist = bfs_distances(&adj, v);
            let (reached, total) = dist
                .iter()
                .enumerate()
                .filter(|&(u, _)| u != v)
                .filter_map(|(_, d)| *d)
                .fold((0usize, 0usize), |(r, s), d| (r + 1, s + d));
            if reached == 0 {
                T::zero()
            } else {
                let r = T::of_usize(reached);
                (r / T::of_usize(total)) * (r / T::of_usize(n - 1))
            }
        })
        .collect()
}

/// Raw directed shortest-path betweenness `sum_{s != v != t} sigma_st(v) / sigma_st`
/// (Brandes accumulation, unweighted).
pub fn betweenness_raw<T: Real>(net: &DirectedCountNetwork) -> Vec<T> {
    let n = net.len();
    let adj = net.adjacency(Direction::Out);
    let mut centrality = vec![T::zero(); n];
    for s in 0..n {
        let mut stack = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![T::zero(); n];
        let mut dist: Vec<i64> = vec![-1; n];
        sigma[s] = T::one();
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] = sigma[w] + sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![T::zero(); n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] = delta[v] + sigma[v] / sigma[w] * (T::one() + delta[w]);
            }
            if w != s {
                centrality[w] = centrality[w] + delta[w];
            }
        }
    }
    centrality
}

/// Affine rescaling to `[0, 1]`; a constant vector maps to all zeros.
pub fn rescale_unit<T: Real>(values: &[T]) -> Vec<T> {
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    if values.is_empty() || hi <= lo {
        return vec![T::zero(); values.len()];
    }
    values.iter().map(|&v| (v - lo) / (hi - lo)).collect()
}

/// Betweenness rescaled so the minimum maps to 0 and the maximum to 1.
pub fn betweenness_scores<T: Real>(net: &DirectedCountNetwork) -> Vec<T> {
    rescale_unit(&betweenness_raw::<T>(net))
}

/// Graph-level summary of the node scores, one value per measure.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub arcs: usize,
    pub total_transfers: u64,
    pub in_centralization: f64,
    pub out_centralization: f64,
    pub mean_in_closeness: f64,
    pub mean_out_closeness: f64,
    pub mean_in_strength: f64,
    pub mean_out_strength: f64,
    pub mean_betweenness: f64,
}

pub fn graph_summary(net: &DirectedCountNetwork) -> GraphSummary {
    use crate::stats::mean;
    let as_f = |v: Vec<u64>| v.into_iter().map(|x| x as f64).collect::<Vec<_>>();
    GraphSummary {
        nodes: net.len(),
        arcs: net.arc_count(),
        total_transfers: net.total(),
        in_centralization: degree_scores::<f64>(net, Direction::In).centralization,
        out_centralization: degree_scores::<f64>(net, Direction::Out).centralization,
        mean_in_closeness: mean(&closeness_scores::<f64>(net, Direction::In)),
        mean_out_closeness: mean(&closeness_scores::<f64>(net, Direction::Out)),
        mean_in_strength: mean(&as_f(strength_scores(net, Direction::In))),
        mean_out_strength: mean(&as_f(strength_scores(net, Direction::Out))),
        mean_betweenness: mean(&betweenness_scores::<f64>(net)),
    }
}
