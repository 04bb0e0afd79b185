use super::centrality::betweenness_scores;
use super::network::DirectedCountNetwork;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Symmetric, irreflexive proximity network: `i` and `j` are linked when their
/// travel time is strictly below the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoNetwork {
    nodes: Vec<String>,
    linked: Vec<Vec<bool>>,
}

/// Builds the proximity network from a symmetric travel-time matrix (minutes).
pub fn geo_threshold_network<T: Real>(
    nodes: &[String],
    travel_minutes: &[Vec<T>],
    threshold: T,
) -> Result<GeoNetwork> {
    let n = nodes.len();
    if travel_minutes.len() != n || travel_minutes.iter().any(|r| r.len() != n) {
        return Err(Error::input(format!(
            "travel-time matrix must be {n}x{n} to match the node list"
        )));
    }
    if !(threshold > T::zero()) {
        return Err(Error::input("travel-time threshold must be positive"));
    }
    let tol = T::of(1e-9);
    let mut linked = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            let d = travel_minutes[i][j];
            if d < T::zero() || d.is_nan() {
                return Err(Error::input(format!(
                    "travel time {}->{} must be non-negative",
                    nodes[i], nodes[j]
                )));
            }
            if (d - travel_minutes[j][i]).abs() > tol {
                return Err(Error::input(format!(
                    "travel-time matrix is not symmetric at ({}, {})",
                    nodes[i], nodes[j]
                )));
            }
            linked[i][j] = i != j && d < threshold;
        }
    }
    Ok(GeoNetwork {
        nodes: nodes.to_vec(),
        linked,
    })
}

impl GeoNetwork {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn linked(&self, i: usize, j: usize) -> bool {
        self.linked[i][j]
    }

    /// Number of linked neighbours per node.
    pub fn degrees(&self) -> Vec<u64> {
        self.linked
            .iter()
            .map(|row| row.iter().filter(|&&l| l).count() as u64)
            .collect()
    }

    /// Both arcs for every link, unit counts.
    pub fn to_directed(&self) -> DirectedCountNetwork {
        let n = self.nodes.len();
        let matrix: Vec<Vec<u64>> = (0..n)
            .map(|i| (0..n).map(|j| u64::from(self.linked[i][j])).collect())
            .collect();
        DirectedCountNetwork::from_matrix(&self.nodes, &matrix).expect("square by construction")
    }

    /// Shortest-path betweenness rescaled to `[0, 1]`.
    pub fn betweenness<T: Real>(&self) -> Vec<T> {
        betweenness_scores(&self.to_directed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        ["A", "B", "C", "D"][..n].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn hand_thresholding() {
        let d = vec![
            vec![0.0, 10.0, 40.0],
            vec![10.0, 0.0, 25.0],
            vec![40.0, 25.0, 0.0],
        ];
        let g = geo_threshold_network(&ids(3), &d, 30.0).unwrap();
        assert!(g.linked(0, 1) && g.linked(1, 2) && !g.linked(0, 2));
        assert_eq!(g.degrees(), vec![1, 2, 1]);
        assert_eq!(g.betweenness::<f64>(), vec![0.0, 1.0, 0.0]);

        let none = geo_threshold_network(&ids(3), &d, 5.0).unwrap();
        assert_eq!(none.degrees(), vec![0, 0, 0]);
    }

    #[test]
    fn rejects_asymmetry_and_bad_threshold() {
        let d = vec![vec![0.0, 10.0], vec![11.0, 0.0]];
        assert!(geo_threshold_network(&ids(2), &d, 30.0).is_err());
        let d = vec![vec![0.0, 10.0], vec![10.0, 0.0]];
        assert!(geo_threshold_network(&ids(2), &d, 0.0).is_err());
        assert!(geo_threshold_network(&ids(3), &d, 10.0).is_err());
    }
}
