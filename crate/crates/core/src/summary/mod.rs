//! Structural summaries: k-hop equivalence classes and summary graphs.

mod eqc;
mod export;
mod hash;

pub use eqc::{
    eqc_hash, hash_levels, summarize, ExtensionMap, HashLevels, Summary, SummaryEdge, SummaryGraph, SummaryModel,
    SummaryOptions,
};
pub use export::{read_vertex_eqcs, write_summary_edges, write_vertex_eqcs};
pub use hash::{hash_pair, EqcHash, PredicateHasher, SIPHASH_KEY};
