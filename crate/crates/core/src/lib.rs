//! Directed count networks and social-relations Poisson mixed models.
//!
//! The crate covers descriptive statistics and community detection on
//! transfer networks ([`graph`]), the over-dispersed Poisson flow model with
//! sender, receiver and reciprocal dyadic effects ([`srm`], [`mcmc`]),
//! posterior-predictive checks ([`gof`]), the second-stage quality model fed
//! by exogenous predicted flows ([`two_stage`]), and a generative simulator
//! with known truth ([`synth`]).
//!
//! Graph scores, moment algebra and the likelihood are generic over [`Real`];
//! the samplers run in `f64`. The aliases below fix the scalar for everyday use.

pub mod error;
pub mod gof;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod mcmc;
pub mod rng;
pub mod scalar;
pub mod srm;
pub mod stats;
pub mod synth;
pub mod two_stage;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Partition = graph::CommunityPartition<f64>;
pub type Design = srm::DyadDesign<f64>;
pub type CovarianceParams = srm::DyadCovarianceParams<f64>;
pub type Moments = srm::ImpliedMoments<f64>;
pub type NetworkStats = gof::GofTriple<f64>;
