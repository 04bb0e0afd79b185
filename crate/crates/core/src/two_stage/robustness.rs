use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::predict::predict_transfers;
use crate::error::{Error, Result};
use crate::graph::{geo_threshold_network, DirectedCountNetwork};
use crate::mcmc::{fit_srm, McmcConfig};
use crate::rng;
use crate::srm::{assemble_design, DyadTable, NodeCovariate, NodeTable, SrmSpec};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub thresholds: Vec<f64>,
    /// Pearson correlations of the predicted-transfer vectors.
    pub correlations: Vec<Vec<f64>>,
}

impl RobustnessReport {
    pub fn min_off_diagonal(&self) -> Option<f64> {
        let k = self.thresholds.len();
        (0..k)
            .flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b)))
            .map(|(a, b)| self.correlations[a][b])
            .reduce(f64::min)
    }
}

/// Replaces the DC and BW columns with values from the proximity network at `threshold`.
pub fn with_geo_covariates(nodes: &NodeTable, dyads: &DyadTable, threshold: f64) -> Result<NodeTable> {
    let geo = geo_threshold_network(dyads.ids(), dyads.distance_matrix(), threshold)?;
    let degree = geo.degrees();
    let between: Vec<f64> = geo.betweenness();
    let mut out = nodes.clone();
    let mut dc = vec![None; nodes.len()];
    let mut bw = vec![None; nodes.len()];
    for (k, id) in dyads.ids().iter().enumerate() {
        let slot = nodes
            .index_of(id)
            .ok_or_else(|| Error::input(format!("node '{id}' missing from node table")))?;
        dc[slot] = Some(degree[k] as f64);
        bw[slot] = Some(between[k]);
    }
    out.set_column(NodeCovariate::GeoDegree.column(), dc)?;
    out.set_column(NodeCovariate::GeoBetweenness.column(), bw)?;
    Ok(out)
}

/// Refits the flow model with geographic covariates recomputed at each
/// threshold and correlates the resulting predicted transfers.
pub fn dc_threshold_robustness(
    nodes: &NodeTable,
    dyads: &DyadTable,
    net: &DirectedCountNetwork,
    thresholds: &[f64],
    spec: &SrmSpec,
    config: &McmcConfig,
) -> Result<RobustnessReport> {
    if thresholds.is_empty() {
        return Err(Error::config("at least one threshold is required"));
    }
    let max_d = dyads
        .distance_matrix()
        .iter()
        .flatten()
        .copied()
        .fold(0.0_f64, f64::max);
    if let Some(t) = thresholds.iter().find(|&&t| !(t > 0.0 && t < max_d)) {
        return Err(Error::config(format!(
            "threshold {t} must lie in (0, {max_d}) minutes"
        )));
    }
    let predictions = thresholds
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let table = with_geo_covariates(nodes, dyads, t)?;
            let design = assemble_design::<f64>(&table, dyads, net, spec)?;
            let cfg = config
                .clone()
                .with_seed(rng::derive_seed(config.seed, "threshold", k as u64));
            let samples = fit_srm(&design, &cfg)?;
            Ok(predict_transfers(&samples, &design)?.off_diagonal())
        })
        .collect::<Result<Vec<_>>>()?;
    let k = thresholds.len();
    let mut correlations = vec![vec![1.0; k]; k];
    for a in 0..k {
        for b in 0..a {
            let r = stats::pearson(&predictions[a], &predictions[b]).unwrap_or(f64::NAN);
            correlations[a][b] = r;
            correlations[b][a] = r;
        }
    }
    Ok(RobustnessReport {
        thresholds: thresholds.to_vec(),
        correlations,
    })
}
