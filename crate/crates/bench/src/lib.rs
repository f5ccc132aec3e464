//! Workloads shared by the benchmarks.

use sumlife_core::features::{extend_vocabularies, ClassVocabulary, PredicateVocabulary};
use sumlife_core::lifelong::{prepare_task, Task};
use sumlife_core::rdf::SnapshotGraph;
use sumlife_core::summary::{summarize, SummaryModel, SummaryOptions};
use sumlife_core::synthetic::random_edge_graph;

/// Random graph with `edges` triples and a fifth as many subjects.
pub fn edge_graph(edges: usize) -> SnapshotGraph {
    random_edge_graph(17, (edges / 5).max(1), edges, 16)
}

/// A snapshot encoded for training under `model`.
pub fn prepared_task(g: SnapshotGraph, model: SummaryModel) -> Task {
    let opts = SummaryOptions::default();
    let s = summarize(&g, model, opts);
    let mut pv = PredicateVocabulary::new();
    let mut cv = ClassVocabulary::new();
    extend_vocabularies(&s.graph, &mut pv, &mut cv);
    prepare_task(g, s, &pv, &cv, opts, 0).expect("task encodes")
}
