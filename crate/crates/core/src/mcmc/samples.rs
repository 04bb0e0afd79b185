use serde::{Deserialize, Serialize};

use super::config::McmcConfig;
use crate::srm::DesignProvenance;

/// Post-burn-in acceptance rates per Metropolis block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRates {
    pub beta: f64,
    pub nu: f64,
    pub ab: f64,
}

/// Thinned draws of the flow model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSamples {
    /// Design column names, in coefficient order.
    pub columns: Vec<String>,
    /// Node ids in design order; `a[d][k]` belongs to `node_ids[k]`.
    pub node_ids: Vec<String>,
    /// Coefficients on the working (standardized) scale, one row per draw.
    pub beta_working: Vec<Vec<f64>>,
    /// Coefficients on the original covariate scale.
    pub beta: Vec<Vec<f64>>,
    pub sigma_a2: Vec<f64>,
    pub sigma_ab: Vec<f64>,
    pub sigma_b2: Vec<f64>,
    pub sigma_nu2: Vec<f64>,
    pub rho: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub acceptance: AcceptanceRates,
    pub provenance: DesignProvenance,
    pub config: McmcConfig,
}

pub const VARIANCE_PARAMETERS: [&str; 5] = ["sigma_a2", "sigma_ab", "sigma_b2", "sigma_nu2", "rho"];

impl PosteriorSamples {
    pub fn draws(&self) -> usize {
        self.rho.len()
    }

    /// Coefficient names followed by the variance components.
    pub fn parameter_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .cloned()
            .chain(VARIANCE_PARAMETERS.iter().map(|s| s.to_string()))
            .collect()
    }

    /// Draws of one named parameter (coefficients on the original scale).
    pub fn parameter(&self, name: &str) -> Option<Vec<f64>> {
        if let Some(k) = self.columns.iter().position(|c| c == name) {
            return Some(self.beta.iter().map(|d| d[k]).collect());
        }
        match name {
            "sigma_a2" => Some(self.sigma_a2.clone()),
            "sigma_ab" => Some(self.sigma_ab.clone()),
            "sigma_b2" => Some(self.sigma_b2.clone()),
            "sigma_nu2" => Some(self.sigma_nu2.clone()),
            "rho" => Some(self.rho.clone()),
            _ => None,
        }
    }

    /// Row-major draw matrix over [`Self::parameter_names`].
    pub fn draw_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.draws())
            .map(|d| {
                let mut row = self.beta[d].clone();
                row.extend([
                    self.sigma_a2[d],
                    self.sigma_ab[d],
                    self.sigma_b2[d],
                    self.sigma_nu2[d],
                    self.rho[d],
                ]);
                row
            })
            .collect()
    }
}
