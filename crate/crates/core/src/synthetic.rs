//! Seeded generators for test and benchmark graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rdf::{GraphBuilder, SnapshotGraph};

/// Snapshot whose vertices fall into one AC1 class per entry of
/// `classes`. Entry `c` lists the predicate IRIs of class `c`; vertex `i`
/// belongs to class `i % classes.len()` and every edge points to another
/// generated vertex, so the graph has no sinks.
pub fn class_snapshot(
    prefix: &str,
    classes: &[Vec<String>],
    vertices: usize,
    seed: u64,
    timestamp: &str,
) -> SnapshotGraph {
    assert!(vertices >= 2 && !classes.is_empty());
    assert!(
        classes.iter().all(|c| !c.is_empty()),
        "classes need at least one predicate"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new();
    for v in 0..vertices {
        let s = format!("{prefix}{v}");
        for p in &classes[v % classes.len()] {
            let mut o = rng.gen_range(0..vertices - 1);
            if o >= v {
                o += 1;
            }
            b.add_iri_triple(&s, p, &format!("{prefix}{o}"));
        }
    }
    b.finish(timestamp)
}

/// `count` distinct non-empty predicate sets over `http://example.org/{ns}/p*`.
pub fn predicate_sets(ns: &str, count: usize) -> Vec<Vec<String>> {
    (1..=count)
        .map(|mask| {
            (0..usize::BITS as usize)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| format!("http://example.org/{ns}/p{b}"))
                .collect()
        })
        .collect()
}

/// 500 vertices in 8 AC1 classes.
pub fn eight_class_snapshot(seed: u64) -> SnapshotGraph {
    class_snapshot(
        "http://example.org/v/",
        &predicate_sets("base", 8),
        500,
        seed,
        "2020-01-01",
    )
}

/// Three snapshots. Each keeps two shared classes and adds six classes no
/// other snapshot has, so three quarters of its classes are task-unique.
pub fn drift_sequence(seed: u64, vertices: usize) -> Vec<SnapshotGraph> {
    let shared = predicate_sets("shared", 2);
    (0..3)
        .map(|t| {
            let mut classes = shared.clone();
            classes.extend(predicate_sets(&format!("task{t}"), 6));
            class_snapshot(
                "http://example.org/v/",
                &classes,
                vertices,
                seed.wrapping_add(t as u64),
                &format!("2020-0{}-01", t + 1),
            )
        })
        .collect()
}

/// Snapshot using only predicates of namespace `ns`. Every vertex lies on a
/// ring, so no vertex is a sink.
pub fn disjoint_ring_snapshot(ns: &str, classes: usize, vertices: usize, seed: u64, timestamp: &str) -> SnapshotGraph {
    let sets = predicate_sets(ns, classes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new();
    let prefix = format!("http://example.org/{ns}/v");
    for v in 0..vertices {
        let s = format!("{prefix}{v}");
        let set = &sets[v % sets.len()];
        b.add_iri_triple(&s, &set[0], &format!("{prefix}{}", (v + 1) % vertices));
        for p in &set[1..] {
            b.add_iri_triple(&s, p, &format!("{prefix}{}", rng.gen_range(0..vertices)));
        }
    }
    b.finish(timestamp)
}

/// Uniform random multigraph with `edges` triples over `vertices` subjects
/// and `predicates` labels. Objects are drawn from the same vertex pool.
pub fn random_edge_graph(seed: u64, vertices: usize, edges: usize, predicates: usize) -> SnapshotGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let preds: Vec<String> = (0..predicates).map(|p| format!("http://example.org/p{p}")).collect();
    let names: Vec<String> = (0..vertices).map(|v| format!("http://example.org/r/{v}")).collect();
    let mut b = GraphBuilder::new();
    for _ in 0..edges {
        let s = rng.gen_range(0..vertices);
        let o = rng.gen_range(0..vertices);
        let p = rng.gen_range(0..predicates);
        b.add_iri_triple(&names[s], &preds[p], &names[o]);
    }
    b.finish("synthetic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::{summarize, SummaryModel, SummaryOptions};

    #[test]
    fn eight_classes_without_sinks() {
        let g = eight_class_snapshot(1);
        assert_eq!(g.vertex_count(), 500);
        let s = summarize(&g, SummaryModel::Ac1, SummaryOptions::default());
        assert_eq!(s.graph.eqcs.len(), 8);
    }

    #[test]
    fn drift_classes_are_mostly_unique() {
        let seq = drift_sequence(3, 240);
        let sums: Vec<_> = seq
            .iter()
            .map(|g| summarize(g, SummaryModel::Ac1, SummaryOptions::default()).graph.eqcs)
            .collect();
        for (t, s) in sums.iter().enumerate() {
            assert_eq!(s.len(), 8);
            let unique = s
                .iter()
                .filter(|q| sums.iter().enumerate().all(|(u, o)| u == t || !o.contains(q)))
                .count();
            assert_eq!(unique, 6);
        }
    }

    #[test]
    fn rings_have_no_sinks() {
        let g = disjoint_ring_snapshot("other", 5, 100, 2, "t");
        assert!((0..g.vertex_count()).all(|v| !g.out_edges(v).is_empty()));
        let r = random_edge_graph(1, 100, 1000, 5);
        assert!(r.edge_count() <= 1000);
    }
}
