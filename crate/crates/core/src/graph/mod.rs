//! Directed count networks: centrality, modularity communities and the
//! travel-time proximity network.

mod centrality;
mod community;
mod geo;
mod network;

pub use centrality::{
    betweenness_raw, betweenness_scores, closeness_scores, degree_scores, graph_summary,
    rescale_unit, strength_scores, DegreeScores, GraphSummary,
};
pub use community::{louvain_communities, modularity, CommunityPartition};
pub use geo::{geo_threshold_network, GeoNetwork};
pub use network::{DirectedCountNetwork, Direction};
