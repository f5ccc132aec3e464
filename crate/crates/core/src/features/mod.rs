//! Multi-hot features, class vocabularies, splits and batch sampling.

mod encode;
mod sampler;
mod split;
mod vocab;

pub use encode::{class_labels, encode_features, FeatureMatrix};
pub use sampler::{
    class_weights, edge_as_vertex_transform, out_closure, sample_batch, target_batches, vertex_probabilities,
    BatchEdge, BatchSampler, Subgraph, DEFAULT_BATCH_CAP,
};
pub use split::{split_sizes, split_vertices, Split, SplitTag, SPLIT_PERCENT};
pub(crate) use vocab::sha256_hex;
pub use vocab::{extend_vocabularies, ClassVocabulary, PredicateVocabulary};
