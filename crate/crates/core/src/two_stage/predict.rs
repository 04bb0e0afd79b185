use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcmc::PosteriorSamples;
use crate::srm::{DyadDesign, SrmSpec};

/// How a set of predicted transfers was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferProvenance {
    /// Spec of the flow model the predictions come from; `None` for
    /// predictions built directly from known fixed effects.
    pub spec: Option<SrmSpec>,
    pub quality_in_design: bool,
    /// Covariates requested by the `SrmSpec` but kept out of the design.
    pub excluded: Vec<String>,
    /// Sender, receiver and dyadic random effects left out of the prediction.
    pub effects_excluded: bool,
    pub draws: usize,
}

/// Predicted transfers `T_ij` over ordered pairs in canonical node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedTransfers {
    pub node_ids: Vec<String>,
    /// Square matrix with a zero diagonal.
    pub values: Vec<Vec<f64>>,
    pub provenance: TransferProvenance,
}

impl PredictedTransfers {
    /// Predictions taken as given, e.g. the exact fixed-effect means of a
    /// simulation truth.
    pub fn from_fixed_effects(node_ids: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = node_ids.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::input("predicted-transfer matrix must be square"));
        }
        for (i, row) in values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j && !(v.is_finite() && v > 0.0) {
                    return Err(Error::input(format!(
                        "predicted transfer {} -> {} must be positive and finite",
                        node_ids[i], node_ids[j]
                    )));
                }
            }
        }
        Ok(Self {
            node_ids,
            values,
            provenance: TransferProvenance {
                spec: None,
                quality_in_design: false,
                excluded: Vec::new(),
                effects_excluded: true,
                draws: 0,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|x| x == id)
    }

    /// Total predicted flow of the unordered pair, `T_ij + T_ji`.
    pub fn symmetrized(&self, i: usize, j: usize) -> f64 {
        self.values[i][j] + self.values[j][i]
    }

    /// Off-diagonal values in row-major order.
    pub fn off_diagonal(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.push(self.values[i][j]);
                }
            }
        }
        out
    }

    /// Fails unless the predictions are free of quality measures and random effects.
    pub fn ensure_exogenous(&self) -> Result<()> {
        if self.provenance.quality_in_design {
            return Err(Error::provenance(
                "predicted transfers come from a flow model that included hospital quality \
                 measures (AM/AR); refit the first stage with include_quality = false",
            ));
        }
        if !self.provenance.effects_excluded {
            return Err(Error::provenance(
                "predicted transfers include random effects; only fixed-effect predictions are allowed",
            ));
        }
        Ok(())
    }
}

/// Posterior mean of `exp(x_ij' beta)` over the saved draws, without any
/// random-effect contribution.
pub fn predict_transfers(
    samples: &PosteriorSamples,
    design: &DyadDesign<f64>,
) -> Result<PredictedTransfers> {
    if samples.provenance.quality_in_design || design.provenance().quality_in_design {
        return Err(Error::provenance(
            "first-stage fit included hospital quality measures (AM/AR); predicted transfers \
             must come from a fit with include_quality = false",
        ));
    }
    if samples.columns != design.columns() || samples.node_ids != design.node_ids() {
        return Err(Error::input("posterior samples do not match the design"));
    }
    if samples.draws() == 0 {
        return Err(Error::input("posterior has no draws"));
    }
    let n = design.node_count();
    let bound = design.clamp();
    let mut values = vec![vec![0.0; n]; n];
    let draws = samples.draws() as f64;
    for r in 0..design.rows() {
        let (i, j) = design.endpoints(r);
        let total: f64 = samples
            .beta_working
            .iter()
            .map(|b| design.dot(r, b).clamp(-bound, bound).exp())
            .sum();
        values[i][j] = total / draws;
    }
    Ok(PredictedTransfers {
        node_ids: design.node_ids().to_vec(),
        values,
        provenance: TransferProvenance {
            spec: Some(design.provenance().spec.clone()),
            quality_in_design: false,
            excluded: design.provenance().excluded.clone(),
            effects_excluded: true,
            draws: samples.draws(),
        },
    })
}
