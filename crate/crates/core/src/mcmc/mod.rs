//! Bayesian estimation of the flow model and posterior reporting.

mod adapt;
mod conjugate;
mod config;
mod sampler;
mod samples;
mod summary;

pub use adapt::{AdaptiveRwProposal, ScaleBank, Tally};
pub use conjugate::{
    project_equal_diagonal, update_dyad_cov, update_inverse_gamma, update_sigma_ab, IwPrior,
    RHO_BOUND,
};
pub use config::{McmcConfig, PriorConfig};
pub use sampler::{fit_srm, fit_srm_chains};
pub(crate) use sampler::glm_start;
pub use samples::{AcceptanceRates, PosteriorSamples, VARIANCE_PARAMETERS};
pub use summary::{pseudo_p, stars, summarize_draws, summarize_named, summarize_posterior, ParameterSummary};
