//! Modularity and multilevel (Louvain) community detection.
//!
//! Directed counts are symmetrized to undirected weights `w_ij = T_ij + T_ji`
//! before anything is scored.

use rand::seq::SliceRandom;

use super::network::DirectedCountNetwork;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

/// Node to community assignment with its modularity.
///
/// `assignment[k]` is the dense label (0..K-1) of the k-th network node.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CommunityPartition<T> {
    pub assignment: Vec<usize>,
    pub modularity: T,
}

impl<T> CommunityPartition<T> {
    pub fn community_count(&self) -> usize {
        self.assignment.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Members of each community, in node-index order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.community_count()];
        for (node, &c) in self.assignment.iter().enumerate() {
            groups[c].push(node);
        }
        groups
    }
}

/// Undirected weights `T_ij + T_ji` over unordered pairs `i < j`.
fn symmetric_edges(net: &DirectedCountNetwork) -> Vec<(usize, usize, f64)> {
    let mut merged = std::collections::BTreeMap::new();
    for (i, j, c) in net.arcs() {
        let key = if i < j { (i, j) } else { (j, i) };
        *merged.entry(key).or_insert(0u64) += c;
    }
    merged
        .into_iter()
        .map(|((i, j), w)| (i, j, w as f64))
        .collect()
}

/// Newman modularity `Q = (1/2m) sum_ij [w_ij - k_i k_j / 2m] delta(c_i, c_j)`
/// on the symmetrized weights.
pub fn modularity<T: Real>(net: &DirectedCountNetwork, assignment: &[usize]) -> Result<T> {
    if assignment.len() != net.len() {
        return Err(Error::input(format!(
            "partition covers {} nodes, network has {}",
            assignment.len(),
            net.len()
        )));
    }
    let edges = symmetric_edges(net);
    let m: f64 = edges.iter().map(|e| e.2).sum();
    if m <= 0.0 {
        return Err(Error::input("empty network has undefined modularity"));
    }
    let labels = assignment.iter().copied().max().map_or(0, |x| x + 1);
    let mut internal = vec![T::zero(); labels];
    let mut degree = vec![T::zero(); labels];
    for &(i, j, w) in &edges {
        let w = T::of(w);
        degree[assignment[i]] = degree[assignment[i]] + w;
        degree[assignment[j]] = degree[assignment[j]] + w;
        if assignment[i] == assignment[j] {
            internal[assignment[i]] = internal[assignment[i]] + w;
        }
    }
    let m = T::of(m);
    let two_m = m + m;
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(&l, &d)| l / m - (d / two_m) * (d / two_m))
        .sum())
}

struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    degree: Vec<f64>,
    two_m: f64,
}

impl WeightedGraph {
    fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut degree = vec![0.0; n];
        for &(i, j, w) in edges {
            adj[i].push((j, w));
            adj[j].push((i, w));
            degree[i] += w;
            degree[j] += w;
        }
        let two_m = degree.iter().sum();
        Self {
            adj,
            self_loop: vec![0.0; n],
            degree,
            two_m,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// One local-moving phase. Returns the community of each node and whether
    /// any node changed community.
    fn local_moving(&self, order: &[usize]) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = self.degree.clone();
        let mut weight_to = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;
        loop {
            let mut moved = false;
            for &i in order {
                let ki = self.degree[i];
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if weight_to[c] == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    weight_to[c] += w;
                }
                let own = comm[i];
                tot[own] -= ki;
                let mut best = own;
                let mut best_gain = weight_to[own] - tot[own] * ki / self.two_m;
                for &c in &touched {
                    let gain = weight_to[c] - tot[c] * ki / self.two_m;
                    if gain > best_gain + 1e-12 {
                        best = c;
                        best_gain = gain;
                    }
                }
                tot[best] += ki;
                comm[i] = best;
                if best != own {
                    moved = true;
                }
                for &c in &touched {
                    weight_to[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any_move = true;
        }
        (comm, any_move)
    }

    /// Collapses communities into single nodes. `comm` must be dense.
    fn aggregate(&self, comm: &[usize], k: usize) -> Self {
        let mut weights = std::collections::BTreeMap::new();
        let mut self_loop = vec![0.0; k];
        let mut degree = vec![0.0; k];
        for i in 0..self.len() {
            degree[comm[i]] += self.degree[i];
            self_loop[comm[i]] += self.self_loop[i];
            for &(j, w) in &self.adj[i] {
                if i < j {
                    let (a, b) = (comm[i], comm[j]);
                    if a == b {
                        self_loop[a] += w;
                    } else {
                        let key = if a < b { (a, b) } else { (b, a) };
                        *weights.entry(key).or_insert(0.0) += w;
                    }
                }
            }
        }
        let mut adj = vec![Vec::new(); k];
        for ((a, b), w) in weights {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        Self {
            adj,
            self_loop,
            degree,
            two_m: self.two_m,
        }
    }
}

fn densify(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let dense = labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (dense, map.len())
}

/// Greedy multilevel modularity optimization on the symmetrized weights.
///
/// Nodes are visited in a seeded shuffled order at every level; each node
/// moves to the neighbouring community with the largest strictly positive
/// gain, ties going to the community encountered first.
pub fn louvain_communities<T: Real>(
    net: &DirectedCountNetwork,
    seed: u64,
) -> Result<CommunityPartition<T>> {
    let edges = symmetric_edges(net);
    if edges.is_empty() {
        return Err(Error::input("empty network has no community structure"));
    }
    let mut graph = WeightedGraph::from_edges(net.len(), &edges);
    let mut membership: Vec<usize> = (0..net.len()).collect();
    for level in 0.. {
        let mut order: Vec<usize> = (0..graph.len()).collect();
        order.shuffle(&mut rng::stream(seed, "louvain", level));
        let (comm, moved) = graph.local_moving(&order);
        if !moved {
            break;
        }
        let (dense, k) = densify(&comm);
        for m in membership.iter_mut() {
            *m = dense[*m];
        }
        if k == graph.len() {
            break;
        }
        graph = graph.aggregate(&dense, k);
    }
    let (assignment, _) = densify(&membership);
    let modularity = modularity(net, &assignment)?;
    Ok(CommunityPartition {
        assignment,
        modularity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_triangles() -> DirectedCountNetwork {
        DirectedCountNetwork::build(
            &["a", "b", "c", "d", "e", "f"],
            &[
                ("a", "b", 1),
                ("b", "c", 1),
                ("c", "a", 1),
                ("d", "e", 1),
                ("e", "f", 1),
                ("f", "d", 1),
                ("c", "d", 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_triangle_modularity() {
        let q: f64 = modularity(&two_triangles(), &[0, 0, 0, 1, 1, 1]).unwrap();
        assert!((q - 5.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn single_community_is_zero() {
        let q: f64 = modularity(&two_triangles(), &[0; 6]).unwrap();
        assert!(q.abs() < 1e-15);
    }

    #[test]
    fn singletons_on_one_edge() {
        let g = DirectedCountNetwork::build(&["a", "b"], &[("a", "b", 4)]).unwrap();
        let q: f64 = modularity(&g, &[0, 1]).unwrap();
        assert!((q + 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_network_errors() {
        let g = DirectedCountNetwork::build::<&str>(&["a", "b"], &[]).unwrap();
        assert!(modularity::<f64>(&g, &[0, 1]).unwrap_err().to_string().contains("undefined"));
        assert!(louvain_communities::<f64>(&g, 1).is_err());
    }

    #[test]
    fn reciprocal_counts_are_merged() {
        let one = DirectedCountNetwork::build(&["a", "b", "c"], &[("a", "b", 2), ("b", "c", 1)]).unwrap();
        let split = DirectedCountNetwork::build(
            &["a", "b", "c"],
            &[("a", "b", 1), ("b", "a", 1), ("c", "b", 1)],
        )
        .unwrap();
        let p = [0, 0, 1];
        assert_eq!(modularity::<f64>(&one, &p).unwrap(), modularity::<f64>(&split, &p).unwrap());
    }

    #[test]
    fn louvain_two_triangles() {
        let p: CommunityPartition<f64> = louvain_communities(&two_triangles(), 3).unwrap();
        assert_eq!(p.community_count(), 2);
        assert_eq!(p.groups(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!((p.modularity - 5.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn louvain_clique_is_one_community() {
        let ids = ["a", "b", "c", "d"];
        let mut edges = Vec::new();
        for (x, a) in ids.iter().enumerate() {
            for b in &ids[x + 1..] {
                edges.push((*a, *b, 1));
            }
        }
        let g = DirectedCountNetwork::build(&ids, &edges).unwrap();
        let p: CommunityPartition<f64> = louvain_communities(&g, 9).unwrap();
        assert_eq!(p.community_count(), 1);
        assert!(p.modularity.abs() < 1e-15);
    }

    #[test]
    fn labels_are_dense_and_consistent() {
        for seed in 0..10 {
            let p: CommunityPartition<f32> = louvain_communities(&two_triangles(), seed).unwrap();
            let k = p.community_count();
            for c in 0..k {
                assert!(p.assignment.contains(&c));
            }
            let q: f32 = modularity(&two_triangles(), &p.assignment).unwrap();
            assert_eq!(q, p.modularity);
        }
    }
}
