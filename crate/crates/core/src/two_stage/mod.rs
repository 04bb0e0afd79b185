//! Second stage: exogenous predicted transfers, the pairwise quality outcome
//! and its over-dispersed Poisson model, effect sizes and exports.

mod effect;
mod heatmap;
mod predict;
mod quality;
mod robustness;
mod sampler;

pub use effect::{effect_size, effect_size_note};
pub use heatmap::{heatmap_export, Heatmap, HeatmapCell, OwnershipFilter};
pub use predict::{predict_transfers, PredictedTransfers, TransferProvenance};
pub use quality::{
    assemble_quality_design, binary_level, overall_quality, ownership_level, quality_from_nodes,
    Outcome, QualityDesign, QualityMatrix, QualityModelSpec, BINARY_LEVELS, OWNERSHIP_LEVELS,
    THAT_COLUMN,
};
pub use robustness::{dc_threshold_robustness, with_geo_covariates, RobustnessReport};
pub use sampler::{fit_quality_model, QualityPosterior};
