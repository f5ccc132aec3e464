//! N-Triples ingestion: parsing, interning, deduplication and degree capping.

mod ntriples;
mod snapshot;
mod term;

pub use ntriples::{parse_line, parse_statement, LineOutcome, RawStatement, RawTerm, SkipReason, Triple};
pub use snapshot::{
    filter_high_degree, load_snapshot, DegreeMode, GraphBuilder, LoadStats, OutEdge, SnapshotGraph, RDF_TYPE,
};
pub use term::{TermId, TermKind, TermTable};
