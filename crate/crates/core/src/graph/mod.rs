//! Networks over categorical levels: connectivity, uniform spanning trees,
//! spectral partitioning, the gs1-gs4 splitting strategies and adjacency
//! spectral embeddings.

mod network;
mod spanning;
mod spectral;
mod split;

pub use network::{Network, NetworkSet};
pub use spanning::{spanning_tree_count, wilson_spanning_tree, SpanningTree};
pub use spectral::{adjacency_spectral_embedding, fiedler_pair, fiedler_vector, spectral_embedding};
pub use split::{
    split_gs1, split_gs2, split_gs3, split_gs4, split_network, SplitStrategy, VertexBipartition,
};
