use serde::{Deserialize, Serialize};

use super::tables::{DyadCovariate, NodeCovariate};

/// Which covariates enter the flow model and how they are prepared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SrmSpec {
    /// Node covariates entering as sender (origin) terms.
    pub sender: Vec<NodeCovariate>,
    /// Node covariates entering as receiver (destination) terms.
    pub receiver: Vec<NodeCovariate>,
    pub dyad: Vec<DyadCovariate>,
    /// When false, quality measures and `quality_correlated` are dropped.
    pub include_quality: bool,
    /// Extra covariates treated as quality-correlated.
    pub quality_correlated: Vec<NodeCovariate>,
    /// Center and scale continuous columns.
    pub standardize: bool,
    /// Symmetric bound applied to the linear predictor before exponentiation.
    pub clamp: f64,
}

impl Default for SrmSpec {
    fn default() -> Self {
        Self {
            sender: NodeCovariate::ALL.to_vec(),
            receiver: NodeCovariate::ALL.to_vec(),
            dyad: vec![DyadCovariate::Distance, DyadCovariate::CoMembership],
            include_quality: false,
            quality_correlated: Vec::new(),
            standardize: true,
            clamp: 30.0,
        }
    }
}

impl SrmSpec {
    /// Spec with only dyadic covariates.
    pub fn dyadic_only() -> Self {
        Self {
            sender: Vec::new(),
            receiver: Vec::new(),
            ..Self::default()
        }
    }

    fn keep(&self, c: NodeCovariate) -> bool {
        self.include_quality || !(c.is_quality() || self.quality_correlated.contains(&c))
    }

    pub fn active_sender(&self) -> Vec<NodeCovariate> {
        self.sender.iter().copied().filter(|&c| self.keep(c)).collect()
    }

    pub fn active_receiver(&self) -> Vec<NodeCovariate> {
        self.receiver.iter().copied().filter(|&c| self.keep(c)).collect()
    }

    /// Whether any quality measure ends up in the design.
    pub fn uses_quality(&self) -> bool {
        self.active_sender()
            .into_iter()
            .chain(self.active_receiver())
            .any(NodeCovariate::is_quality)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quality_filtering() {
        let mut spec = SrmSpec::default();
        assert!(!spec.uses_quality());
        assert!(!spec.active_sender().contains(&NodeCovariate::AdjustedMortality));
        spec.include_quality = true;
        assert!(spec.uses_quality());
        spec.include_quality = false;
        spec.quality_correlated = vec![NodeCovariate::Teaching];
        assert!(!spec.active_receiver().contains(&NodeCovariate::Teaching));
    }

    #[test]
    fn json_uses_column_names() {
        let spec: SrmSpec =
            serde_json::from_str(r#"{"sender":["HD"],"receiver":["DC"],"dyad":["D","CM"]}"#).unwrap();
        assert_eq!(spec.sender, vec![NodeCovariate::Discharges]);
        assert!(spec.standardize);
        assert_eq!(spec.clamp, 30.0);
    }
}
