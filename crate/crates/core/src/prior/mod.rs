//! The generative prior over trees, rules and jumps, plus the partition
//! analyses it induces on categorical levels.

mod draws;
mod partitions;

pub use draws::{
    draw_jumps, draw_prior_tree, draw_rule, draw_tree_structure, eligible_vars, uniform_subset,
    PriorConfig,
};
pub use partitions::{
    bell_number, co_clustering_matrix, count_onehot_partitions, draw_prior_network_partition,
    enumerate_onehot_partitions, induced_level_partition, LevelPartition, PartitionTarget,
};
