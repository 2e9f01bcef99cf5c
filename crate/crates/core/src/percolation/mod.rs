//! Bond/site percolation: sampling, cluster labeling, crossing events and
//! Monte Carlo estimators.

pub mod blocksize;
pub mod clusters;
pub mod estimate;
pub mod events;
pub mod flow;
pub mod sample;

pub use blocksize::{find_block_size, BlockSizeResult, BlockSizeSearch};
pub use clusters::{crossing_clusters, dominant_crossing_cluster, label_clusters, label_region, ClusterLabeling, UnionFind};
pub use estimate::{
    crossing_sweep, edge_disjoint_scaling, estimate_event_probability, interpolate_crossing,
    largest_cluster_scaling, pair_connection_probability, resource_bound, theta_estimate, BoundConstants,
    CrossingCountReport, EventEstimate, ScalingReport,
};
pub use events::{evaluate_event, BlockLayout, Event, EventKind};
pub use flow::count_edge_disjoint_crossings;
pub use sample::{sample, trial_rng, PercolationSample, Uniforms};
