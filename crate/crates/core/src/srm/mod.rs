//! Social-relations flow model: covariate tables, design assembly, the
//! Poisson likelihood and the error-covariance algebra.

mod design;
mod likelihood;
mod moments;
mod spec;
mod tables;

pub use design::{
    assemble_design, standardize_columns, CoefTransform, ColumnScaling, DesignProvenance,
    DyadDesign,
};
pub use likelihood::{linear_predictor, poisson_loglik};
pub use moments::{implied_moments, DyadCovarianceParams, ImpliedMoments};
pub use spec::SrmSpec;
pub use tables::{
    DyadCovariate, DyadTable, NodeCovariate, NodeTable, DEATHS_COLUMN, READMISSIONS_COLUMN,
};
