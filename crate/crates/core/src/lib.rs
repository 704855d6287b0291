//! Retweet-network analysis of partisan polarisation and hashtag hijacking.
//!
//! The pipeline runs [`ingest`] → [`graph`] → [`community`] → [`labeling`]
//! → [`hashjack`] / [`metrics`]. [`synth`] generates corpora with planted
//! ground truth for validating all of it.

pub mod community;
pub mod export;
pub mod graph;
pub mod hashjack;
pub mod ingest;
pub mod labeling;
pub mod metrics;
pub mod synth;

pub use community::{louvain, modularity, CommunityError, CommunityPartition};
pub use graph::{build_network, undirected_projection, AccountIdx, AccountRegistry, RetweetNetwork, UndirectedGraph};
pub use hashjack::{
    contingency, fit_logistic, hashjack_matrix, odds_ratio, ContingencyTable2x2, HashjackEstimate, LogisticFit,
};
pub use ingest::{parse_records, split_streams, CorpusStats, Format, TweetRecord};
pub use labeling::{label_by_seeds, partisans, top_retweeted, ClusterLabeling, Label, PartisanAssignment};
pub use metrics::{cluster_composition, concentration, polarisation, Basis, ConcentrationCurve, PolarisationProfile};
pub use synth::{generate, GroundTruth, SynthConfig};
