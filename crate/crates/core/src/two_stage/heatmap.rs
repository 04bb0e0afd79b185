use serde::{Deserialize, Serialize};

use super::sampler::QualityPosterior;
use crate::error::{Error, Result};
use crate::graph::DirectedCountNetwork;
use crate::srm::NodeTable;

/// Which ownership block of the matrix to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OwnershipFilter {
    #[default]
    All,
    PublicPublic,
    PrivatePrivate,
    /// Public rows against private columns.
    PublicPrivate,
}

impl OwnershipFilter {
    pub const ALL: [OwnershipFilter; 4] = [
        Self::All,
        Self::PublicPublic,
        Self::PrivatePrivate,
        Self::PublicPrivate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::All => "all",
            Self::PublicPublic => "public-public",
            Self::PrivatePrivate => "private-private",
            Self::PublicPrivate => "public-private",
        }
    }

    fn accepts(self, row_public: bool, col_public: bool) -> (bool, bool) {
        match self {
            Self::All => (true, true),
            Self::PublicPublic => (row_public, col_public),
            Self::PrivatePrivate => (!row_public, !col_public),
            Self::PublicPrivate => (row_public, !col_public),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub row_id: String,
    pub col_id: String,
    pub observed_transfers: u64,
    /// Posterior mean of `E(W_ij)` divided by the pair-average discharges.
    pub predicted_outcome_per_discharge: f64,
    /// `ln(observed_transfers)`; `None` for zero cells.
    pub log_value: Option<f64>,
    pub is_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub filter: OwnershipFilter,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    /// Row-major over `rows x cols`, skipping the diagonal.
    pub cells: Vec<HeatmapCell>,
}

/// Transfer and predicted-outcome matrices with rows and columns sorted by
/// discharges (descending, ties by id).
pub fn heatmap_export(
    posterior: &QualityPosterior,
    net: &DirectedCountNetwork,
    nodes: &NodeTable,
    filter: OwnershipFilter,
) -> Result<Heatmap> {
    let ids = &posterior.node_ids;
    let n = ids.len();
    let mut hd = Vec::with_capacity(n);
    let mut public = Vec::with_capacity(n);
    for id in ids {
        hd.push(nodes.require(id, "HD")?);
        public.push(nodes.require(id, "Public")? == 1.0);
    }
    let mut fitted = vec![vec![0.0; n]; n];
    for (k, &(i, j)) in posterior.pairs.iter().enumerate() {
        fitted[i][j] = posterior.fitted[k];
        fitted[j][i] = posterior.fitted[k];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| hd[b].total_cmp(&hd[a]).then_with(|| ids[a].cmp(&ids[b])));
    let rows: Vec<usize> = order.iter().copied().filter(|&i| filter.accepts(public[i], false).0).collect();
    let cols: Vec<usize> = order.iter().copied().filter(|&j| filter.accepts(false, public[j]).1).collect();
    let net_idx: Vec<usize> = ids
        .iter()
        .map(|id| {
            net.index_of(id)
                .ok_or_else(|| Error::input(format!("node '{id}' missing from transfer network")))
        })
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for &i in &rows {
        for &j in &cols {
            if i == j {
                continue;
            }
            let observed = net.count(net_idx[i], net_idx[j]);
            cells.push(HeatmapCell {
                row_id: ids[i].clone(),
                col_id: ids[j].clone(),
                observed_transfers: observed,
                predicted_outcome_per_discharge: fitted[i][j] / (0.5 * (hd[i] + hd[j])),
                log_value: (observed > 0).then(|| (observed as f64).ln()),
                is_zero: observed == 0,
            });
        }
    }
    Ok(Heatmap {
        filter,
        rows: rows.iter().map(|&i| ids[i].clone()).collect(),
        cols: cols.iter().map(|&j| ids[j].clone()).collect(),
        cells,
    })
}
