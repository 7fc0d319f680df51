//! The learned sampling heuristic.
//!
//! Each joint of the arm is a node of a chain graph. Per-node features
//! (Cartesian joint positions and joint angles for the current and goal
//! configurations) are concatenated and embedded; the obstacle descriptor is
//! embedded to the same width; cross-attention lets every joint attend to the
//! obstacle embedding; one round of sum-aggregated message passing mixes
//! information along the chain; a shared head reads one joint angle per node.
//! Dropout stays active while sampling, so repeated calls yield different
//! proposals.

mod features;
mod graph;
mod network;

pub use features::{
    node_features, FeatureMode, FeatureScales, NodeFeatureMatrix, FULL_WIDTH, RELAXED_WIDTH,
};
pub use graph::{build_graph, ManipulatorGraph};
pub use network::{sample_next, Heuristic, HeuristicConfig, WEIGHTS_META_KEY};
