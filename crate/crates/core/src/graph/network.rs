use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// Edge direction used by the directional centrality scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

/// Node set plus ordered-pair transfer counts. Self-transfers are never stored
/// and absent pairs count as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedCountNetwork {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    counts: BTreeMap<(usize, usize), u64>,
}

impl DirectedCountNetwork {
    /// Builds a network from node ids and `(src, dst, count)` triples.
    ///
    /// Duplicate pairs are summed and zero counts are dropped.
    pub fn build<S: AsRef<str>>(nodes: &[S], edges: &[(S, S, i64)]) -> Result<Self> {
        let mut net = Self::with_nodes(nodes)?;
        for (src, dst, count) in edges {
            let (src, dst) = (src.as_ref(), dst.as_ref());
            let i = net.require(src)?;
            let j = net.require(dst)?;
            if i == j {
                return Err(Error::input(format!("self-loop on node '{src}'")));
            }
            if *count < 0 {
                return Err(Error::input(format!(
                    "negative count {count} on edge '{src}' -> '{dst}'"
                )));
            }
            if *count > 0 {
                *net.counts.entry((i, j)).or_insert(0) += *count as u64;
            }
        }
        Ok(net)
    }

    /// Empty network over the given node ids.
    pub fn with_nodes<S: AsRef<str>>(nodes: &[S]) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        let mut names = Vec::with_capacity(nodes.len());
        for (k, id) in nodes.iter().enumerate() {
            let id = id.as_ref().to_string();
            if index.insert(id.clone(), k).is_some() {
                return Err(Error::input(format!("duplicate node id '{id}'")));
            }
            names.push(id);
        }
        Ok(Self {
            nodes: names,
            index,
            counts: BTreeMap::new(),
        })
    }

    /// Builds from a dense count matrix (diagonal ignored).
    pub fn from_matrix<S: AsRef<str>>(nodes: &[S], counts: &[Vec<u64>]) -> Result<Self> {
        let mut net = Self::with_nodes(nodes)?;
        if counts.len() != nodes.len() || counts.iter().any(|r| r.len() != nodes.len()) {
            return Err(Error::input("count matrix is not square in the node count"));
        }
        for (i, row) in counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if i != j && c > 0 {
                    net.counts.insert((i, j), c);
                }
            }
        }
        Ok(net)
    }

    fn require(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::input(format!("unknown node id '{id}'")))
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn count_by_id(&self, src: &str, dst: &str) -> Option<u64> {
        Some(self.count(self.index_of(src)?, self.index_of(dst)?))
    }

    /// Positive-count arcs in `(src, dst)` order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn arc_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Sorted neighbour lists following arcs in `direction` from each node.
    pub fn adjacency(&self, direction: Direction) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for &(i, j) in self.counts.keys() {
            match direction {
                Direction::Out => adj[i].push(j),
                Direction::In => adj[j].push(i),
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Dense count matrix with zero diagonal.
    pub fn to_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.len();
        let mut m = vec![vec![0; n]; n];
        for (&(i, j), &c) in &self.counts {
            m[i][j] = c;
        }
        m
    }

    /// Subnetwork induced by the given node indices, in the given order.
    pub fn induced(&self, keep: &[usize]) -> Self {
        let ids: Vec<&str> = keep.iter().map(|&k| self.nodes[k].as_str()).collect();
        let mut sub = Self::with_nodes(&ids).expect("ids unique in parent");
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                let c = self.count(i, j);
                if a != b && c > 0 {
                    sub.counts.insert((a, b), c);
                }
            }
        }
        sub
    }

    /// Same network with nodes listed in `order` (a permutation of indices).
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.len());
        self.induced(order)
    }
}
