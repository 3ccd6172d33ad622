//! Multi-frame fusion, clustering and proposal extraction.

mod cluster;
mod fuse;
mod proposal;

pub use cluster::{cluster_moving_cells, cluster_objects, Cluster, ClusterConfig};
pub use fuse::{fuse_multiframe, FusionConfig};
pub use proposal::{
    cells_to_velocity, extract_proposal_points, read_proposals, write_proposals, Proposal,
    ProposalRecord,
};
