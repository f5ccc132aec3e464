//! Hash-based k-hop equivalence classes and the summary graph.
//!
//! For a vertex `x`, level 0 is the constant 0 and level `d + 1` is the XOR
//! over the *set* `{ hash(p, level_d(y)) | (x, p, y) in E }`. The attribute
//! collection `ACk` uses level `k`. All vertices are advanced one level at a
//! time, so the cost is O(k * |E|) hashes regardless of neighborhood overlap.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hash::{hash_pair, EqcHash, PredicateHasher};
use crate::error::{Error, Result};
use crate::rdf::{SnapshotGraph, TermId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SummaryModel {
    #[serde(rename = "ac1")]
    Ac1,
    #[serde(rename = "ac2")]
    Ac2,
}

impl SummaryModel {
    pub fn hops(self) -> usize {
        match self {
            SummaryModel::Ac1 => 1,
            SummaryModel::Ac2 => 2,
        }
    }

    pub fn from_hops(hops: usize) -> Result<Self> {
        match hops {
            1 => Ok(SummaryModel::Ac1),
            2 => Ok(SummaryModel::Ac2),
            k => Err(Error::Config(format!("unsupported hop count {k}, expected 1 or 2"))),
        }
    }
}

impl fmt::Display for SummaryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SummaryModel::Ac1 => "ac1",
            SummaryModel::Ac2 => "ac2",
        })
    }
}

impl FromStr for SummaryModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ac1" => Ok(SummaryModel::Ac1),
            "ac2" => Ok(SummaryModel::Ac2),
            other => Err(Error::Config(format!("unknown summary model {other:?}"))),
        }
    }
}

/// Per-level hash values for every local vertex. `levels[0]` is all zeros.
#[derive(Debug, Clone)]
pub struct HashLevels {
    levels: Vec<Vec<u64>>,
}

impl HashLevels {
    pub fn level(&self, d: usize) -> &[u64] {
        &self.levels[d]
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn top(&self) -> &[u64] {
        self.levels.last().expect("at least level 0")
    }
}

/// Compute hash levels `0..=hops` for all vertices bottom-up.
pub fn hash_levels(g: &SnapshotGraph, hops: usize, include_rdf_type: bool) -> HashLevels {
    let n = g.vertex_count();
    let (pred_slot, hashers) = predicate_hashers(g);
    let mut levels = Vec::with_capacity(hops + 1);
    levels.push(vec![0u64; n]);
    for _ in 0..hops {
        let prev: &Vec<u64> = levels.last().unwrap();
        let next: Vec<u64> = (0..n)
            .into_par_iter()
            .map_init(Vec::new, |pairs: &mut Vec<(u32, u64)>, v| {
                pairs.clear();
                pairs.extend(
                    g.considered_edges(v, include_rdf_type)
                        .map(|e| (pred_slot[e.predicate.index()], prev[e.target as usize])),
                );
                fold_pairs(pairs, &hashers)
            })
            .collect();
        levels.push(next);
    }
    HashLevels { levels }
}

/// XOR-fold the distinct pairs. Duplicates must be removed first: XOR would
/// otherwise cancel two identical contributions.
#[inline]
fn fold_pairs(pairs: &mut Vec<(u32, u64)>, hashers: &[PredicateHasher]) -> u64 {
    pairs.sort_unstable();
    pairs.dedup();
    pairs
        .iter()
        .fold(0u64, |acc, &(p, h)| acc ^ hashers[p as usize].hash(EqcHash(h)))
}

fn predicate_hashers(g: &SnapshotGraph) -> (Vec<u32>, Vec<PredicateHasher>) {
    let mut slot = vec![u32::MAX; g.terms().len()];
    let mut hashers = Vec::with_capacity(g.predicates().len());
    for (i, &p) in g.predicates().iter().enumerate() {
        slot[p.index()] = i as u32;
        hashers.push(PredicateHasher::new(g.predicate_iri(p)));
    }
    (slot, hashers)
}

/// EQC of a single vertex by direct recursion over its k-hop neighborhood.
///
/// Equivalent to `hash_levels(g, k, ..).top()[v]` but evaluated per vertex;
/// meant for spot checks, not for whole graphs.
pub fn eqc_hash(g: &SnapshotGraph, vertex: TermId, hops: usize, include_rdf_type: bool) -> Result<EqcHash> {
    let v = g
        .local_index(vertex)
        .ok_or_else(|| Error::UnknownVertex(vertex.to_string()))?;
    Ok(EqcHash(recurse(g, v, hops, include_rdf_type)))
}

fn recurse(g: &SnapshotGraph, v: usize, depth: usize, include_rdf_type: bool) -> u64 {
    if depth == 0 {
        return 0;
    }
    let mut set: Vec<(TermId, u64)> = g
        .considered_edges(v, include_rdf_type)
        .map(|e| (e.predicate, recurse(g, e.target as usize, depth - 1, include_rdf_type)))
        .collect();
    set.sort_unstable();
    set.dedup();
    set.iter()
        .fold(0, |acc, &(p, h)| acc ^ hash_pair(g.predicate_iri(p), EqcHash(h)))
}

/// Summary edge `(source EQC, (p, child), d_{p,child})`. The secondary vertex
/// is identified by `(predicate, child)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SummaryEdge {
    pub source: EqcHash,
    /// Index into [`SummaryGraph::predicates`].
    pub predicate: u32,
    pub child: EqcHash,
}

/// Summary graph S_t = (C ∪ D, E^S, R^S).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryGraph {
    pub timestamp: String,
    pub model: SummaryModel,
    /// Primary vertices C, sorted.
    pub eqcs: Vec<EqcHash>,
    /// Secondary vertices D as (predicate index, child hash), sorted.
    pub secondary: Vec<(u32, EqcHash)>,
    /// E^S, sorted and distinct.
    pub edges: Vec<SummaryEdge>,
    /// R^S: considered predicate IRIs in lexical order.
    pub predicates: Vec<String>,
    /// Number of considered original edges per predicate, aligned with `predicates`.
    pub predicate_usage: Vec<u64>,
}

impl SummaryGraph {
    pub fn contains(&self, q: EqcHash) -> bool {
        self.eqcs.binary_search(&q).is_ok()
    }

    /// |V^S| = |C| + |D|.
    pub fn vertex_count(&self) -> usize {
        self.eqcs.len() + self.secondary.len()
    }
}

/// Members of every EQC, as a partition of the snapshot's vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionMap {
    hashes: Vec<EqcHash>,
    offsets: Vec<usize>,
    members: Vec<TermId>,
}

impl ExtensionMap {
    /// Build from (hash, member) pairs in any order.
    pub fn from_assignments(assignments: impl IntoIterator<Item = (EqcHash, TermId)>) -> Self {
        let mut pairs: Vec<(EqcHash, TermId)> = assignments.into_iter().collect();
        pairs.par_sort_unstable();
        Self::from_sorted(&pairs)
    }

    fn from_sorted(pairs: &[(EqcHash, TermId)]) -> Self {
        let mut hashes = Vec::new();
        let mut offsets = vec![0];
        for (i, &(h, _)) in pairs.iter().enumerate() {
            if i > 0 && pairs[i - 1].0 != h {
                offsets.push(i);
            }
            if hashes.last() != Some(&h) {
                hashes.push(h);
            }
        }
        if !pairs.is_empty() {
            offsets.push(pairs.len());
        }
        Self {
            hashes,
            offsets,
            members: pairs.iter().map(|&(_, t)| t).collect(),
        }
    }

    /// ext_t(q): number of members, 0 for unknown classes.
    pub fn ext(&self, q: EqcHash) -> usize {
        self.members(q).map_or(0, <[TermId]>::len)
    }

    pub fn members(&self, q: EqcHash) -> Option<&[TermId]> {
        self.hashes.binary_search(&q).ok().map(|i| self.class(i))
    }

    fn class(&self, i: usize) -> &[TermId] {
        &self.members[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Σ_q ext_t(q), the number of partitioned vertices.
    pub fn total(&self) -> usize {
        self.members.len()
    }

    pub fn class_count(&self) -> usize {
        self.hashes.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EqcHash, &[TermId])> {
        self.hashes.iter().enumerate().map(|(i, h)| (*h, self.class(i)))
    }

    pub fn hashes(&self) -> impl Iterator<Item = EqcHash> + '_ {
        self.hashes.iter().copied()
    }
}

/// Options shared by summarization and feature encoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SummaryOptions {
    pub include_rdf_type: bool,
}

/// Result of summarizing one snapshot.
#[derive(Debug, Clone)]
pub struct Summary {
    pub graph: SummaryGraph,
    pub extension: ExtensionMap,
    /// EQC of every local vertex of the summarized snapshot.
    pub vertex_eqc: Vec<EqcHash>,
}

pub fn summarize(g: &SnapshotGraph, model: SummaryModel, opts: SummaryOptions) -> Summary {
    let hops = model.hops();
    let levels = hash_levels(g, hops, opts.include_rdf_type);
    let top = levels.top();
    let child_level = levels.level(hops - 1);

    // R^S in lexical order, remembering each term's rank.
    let mut preds: Vec<TermId> = g
        .predicates()
        .iter()
        .copied()
        .filter(|&p| opts.include_rdf_type || !g.is_rdf_type(p))
        .collect();
    preds.sort_by(|a, b| g.predicate_iri(*a).cmp(g.predicate_iri(*b)));
    let mut rank = vec![u32::MAX; g.terms().len()];
    for (i, p) in preds.iter().enumerate() {
        rank[p.index()] = i as u32;
    }

    let mut usage = vec![0u64; preds.len()];
    for v in 0..g.vertex_count() {
        for e in g.considered_edges(v, opts.include_rdf_type) {
            usage[rank[e.predicate.index()] as usize] += 1;
        }
    }

    // Vertex terms ascend with the local index, so this sort also orders
    // every class's members.
    let mut by_class: Vec<(EqcHash, TermId)> = (0..g.vertex_count())
        .map(|v| (EqcHash(top[v]), g.vertex_term(v)))
        .collect();
    by_class.par_sort_unstable();
    let extension = ExtensionMap::from_sorted(&by_class);
    let eqcs: Vec<EqcHash> = extension.hashes().collect();

    // Members of one EQC share their (predicate, child) set, so the first
    // member of each class yields its summary edges, already in order.
    let mut edges = Vec::new();
    let mut pairs: Vec<(u32, EqcHash)> = Vec::new();
    for (q, members) in extension.iter() {
        let v = g.local_index(members[0]).expect("member is a vertex");
        pairs.clear();
        pairs.extend(
            g.considered_edges(v, opts.include_rdf_type)
                .map(|e| (rank[e.predicate.index()], EqcHash(child_level[e.target as usize]))),
        );
        pairs.sort_unstable();
        pairs.dedup();
        edges.extend(pairs.iter().map(|&(predicate, child)| SummaryEdge {
            source: q,
            predicate,
            child,
        }));
    }

    let mut secondary: Vec<(u32, EqcHash)> = edges.iter().map(|e| (e.predicate, e.child)).collect();
    secondary.par_sort_unstable();
    secondary.dedup();

    let vertex_eqc: Vec<EqcHash> = top.iter().map(|&h| EqcHash(h)).collect();

    Summary {
        graph: SummaryGraph {
            timestamp: g.timestamp().to_string(),
            model,
            eqcs,
            secondary,
            edges,
            predicates: preds.iter().map(|&p| g.predicate_iri(p).to_string()).collect(),
            predicate_usage: usage,
        },
        extension,
        vertex_eqc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::GraphBuilder;

    fn graph(edges: &[(&str, &str, &str)]) -> SnapshotGraph {
        let mut b = GraphBuilder::new();
        for (s, p, o) in edges {
            b.add_iri_triple(s, p, o);
        }
        b.finish("t")
    }

    fn class_of(g: &SnapshotGraph, s: &Summary, iri: &str) -> EqcHash {
        s.vertex_eqc[g.iri_vertex(iri).unwrap()]
    }

    #[test]
    fn sinks_hash_to_zero() {
        let g = graph(&[("a", "p", "b")]);
        let b = g.terms().get(crate::rdf::TermKind::Iri, "b").unwrap();
        for k in 1..=2 {
            assert_eq!(eqc_hash(&g, b, k, false).unwrap(), EqcHash(0));
        }
    }

    #[test]
    fn same_label_sets_share_a_class() {
        let g = graph(&[("v1", "p", "x"), ("v1", "q", "y"), ("v4", "p", "u"), ("v4", "q", "w")]);
        let s = summarize(&g, SummaryModel::Ac2, SummaryOptions::default());
        assert_eq!(class_of(&g, &s, "v1"), class_of(&g, &s, "v4"));
    }

    #[test]
    fn chain_refines_with_hops() {
        let g = graph(&[("a", "p", "b"), ("b", "p", "c")]);
        let s1 = summarize(&g, SummaryModel::Ac1, SummaryOptions::default());
        assert_eq!(class_of(&g, &s1, "a"), class_of(&g, &s1, "b"));
        assert_ne!(class_of(&g, &s1, "a"), class_of(&g, &s1, "c"));
        let mut ext1: Vec<usize> = s1.extension.iter().map(|(_, m)| m.len()).collect();
        ext1.sort_unstable();
        assert_eq!(ext1, vec![1, 2]);

        let s2 = summarize(&g, SummaryModel::Ac2, SummaryOptions::default());
        assert_eq!(s2.graph.eqcs.len(), 3);
        assert!(s2.extension.iter().all(|(_, m)| m.len() == 1));
    }

    #[test]
    fn parallel_edges_do_not_cancel() {
        let g = graph(&[("x", "p", "y1"), ("x", "p", "y2")]);
        let x = g.terms().get(crate::rdf::TermKind::Iri, "x").unwrap();
        let h = eqc_hash(&g, x, 1, false).unwrap();
        assert_eq!(h.0, hash_pair("p", EqcHash(0)));
        assert_ne!(h, EqcHash(0));
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let g = graph(&[("a", "p", "b")]);
        let p = g.terms().get(crate::rdf::TermKind::Iri, "p").unwrap();
        assert!(matches!(eqc_hash(&g, p, 1, false), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn all_sinks_give_one_class() {
        let mut b = GraphBuilder::new();
        for i in 0..3 {
            b.add_iri_triple("hub", "p", &format!("leaf{i}"));
        }
        let g = crate::rdf::filter_high_degree(&b.finish("t"), Some(2), crate::rdf::DegreeMode::Total);
        let s = summarize(&g, SummaryModel::Ac1, SummaryOptions::default());
        assert_eq!(s.graph.eqcs, vec![EqcHash(0)]);
        assert_eq!(s.extension.ext(EqcHash(0)), 3);
        assert!(s.graph.edges.is_empty());
    }

    #[test]
    fn summary_edges_follow_the_definition() {
        // a and b are in the same AC1 class; both point via p to sinks.
        let g = graph(&[("a", "p", "x"), ("b", "p", "y"), ("a", "q", "b")]);
        let s = summarize(&g, SummaryModel::Ac1, SummaryOptions::default());
        // Sources: class(a) has p and q edges, class(b) has one p edge.
        // Children at AC1 are always the level-0 hash.
        assert!(s.graph.edges.iter().all(|e| e.child == EqcHash(0)));
        assert_eq!(s.graph.edges.len(), 3);
        assert_eq!(s.graph.secondary.len(), 2);
        assert_eq!(s.graph.predicates, vec!["p".to_string(), "q".to_string()]);
        assert_eq!(s.graph.predicate_usage, vec![2, 1]);
    }

    #[test]
    fn disconnected_copies_double_extensions() {
        let pattern = |tag: &str| {
            vec![
                (format!("{tag}1"), "p", format!("{tag}2")),
                (format!("{tag}2"), "q", format!("{tag}3")),
                (format!("{tag}1"), "r", format!("{tag}4")),
                (format!("{tag}4"), "p", format!("{tag}5")),
            ]
        };
        let build = |tags: &[&str]| {
            let mut b = GraphBuilder::new();
            for t in tags {
                for (s, p, o) in pattern(t) {
                    b.add_iri_triple(&s, p, &o);
                }
            }
            b.finish("t")
        };
        let one = summarize(&build(&["a"]), SummaryModel::Ac2, SummaryOptions::default());
        let two = summarize(&build(&["a", "b"]), SummaryModel::Ac2, SummaryOptions::default());
        assert_eq!(one.graph.eqcs, two.graph.eqcs);
        for q in &one.graph.eqcs {
            assert_eq!(two.extension.ext(*q), 2 * one.extension.ext(*q));
        }
    }

    #[test]
    fn levels_match_direct_recursion() {
        let g = graph(&[
            ("a", "p", "b"),
            ("b", "q", "c"),
            ("c", "p", "a"),
            ("d", "p", "b"),
            ("d", "p", "e"),
        ]);
        for k in 1..=2 {
            let levels = hash_levels(&g, k, false);
            for v in 0..g.vertex_count() {
                let direct = eqc_hash(&g, g.vertex_term(v), k, false).unwrap();
                assert_eq!(levels.top()[v], direct.0);
            }
        }
    }
}
