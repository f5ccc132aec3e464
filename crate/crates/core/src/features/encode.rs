use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rdf::{SnapshotGraph, TermId};
use crate::summary::{Summary, SummaryOptions};
use crate::tensor::Tensor;

use super::vocab::{ClassVocabulary, PredicateVocabulary};

/// Sparse multi-hot encoding of outgoing predicates, one row per local vertex.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    width: usize,
    offsets: Vec<usize>,
    columns: Vec<u32>,
    predicate_columns: HashMap<TermId, u32>,
    include_rdf_type: bool,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Vocabulary width at encoding time.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Sorted active columns of row `v`.
    pub fn row(&self, v: usize) -> &[u32] {
        &self.columns[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Input column of a predicate term, if it is encoded.
    pub fn predicate_column(&self, p: TermId) -> Option<u32> {
        self.predicate_columns.get(&p).copied()
    }

    pub fn include_rdf_type(&self) -> bool {
        self.include_rdf_type
    }

    /// Dense rows for `vertices`, `width` columns wide. Columns at or beyond
    /// `width` are dropped.
    pub fn dense(&self, vertices: &[usize], width: usize) -> Tensor {
        let mut t = Tensor::zeros(vertices.len(), width);
        for (i, &v) in vertices.iter().enumerate() {
            let row = t.row_mut(i);
            for &c in self.row(v) {
                if (c as usize) < width {
                    row[c as usize] = 1.0;
                }
            }
        }
        t
    }
}

pub fn encode_features(g: &SnapshotGraph, vocab: &PredicateVocabulary, opts: SummaryOptions) -> Result<FeatureMatrix> {
    let mut predicate_columns = HashMap::new();
    for &p in g.predicates() {
        if !opts.include_rdf_type && g.is_rdf_type(p) {
            continue;
        }
        let iri = g.predicate_iri(p);
        let col = vocab
            .index_of(iri)
            .ok_or_else(|| Error::Invalid(format!("predicate {iri} missing from vocabulary")))?;
        predicate_columns.insert(p, col);
    }
    let mut offsets = Vec::with_capacity(g.vertex_count() + 1);
    let mut columns = Vec::new();
    offsets.push(0);
    for v in 0..g.vertex_count() {
        let start = columns.len();
        columns.extend(
            g.considered_edges(v, opts.include_rdf_type)
                .map(|e| predicate_columns[&e.predicate]),
        );
        columns[start..].sort_unstable();
        let mut keep = start;
        for i in start..columns.len() {
            if i == start || columns[i] != columns[keep - 1] {
                columns[keep] = columns[i];
                keep += 1;
            }
        }
        columns.truncate(keep);
        offsets.push(columns.len());
    }
    Ok(FeatureMatrix {
        width: vocab.width(),
        offsets,
        columns,
        predicate_columns,
        include_rdf_type: opts.include_rdf_type,
    })
}

/// Class index of every local vertex.
pub fn class_labels(summary: &Summary, classes: &ClassVocabulary) -> Result<Vec<u32>> {
    summary
        .vertex_eqc
        .iter()
        .map(|&q| {
            classes
                .index_of(q)
                .ok_or_else(|| Error::Invalid(format!("class {q} missing from vocabulary")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::extend_vocabularies;
    use crate::rdf::GraphBuilder;
    use crate::summary::{summarize, SummaryModel};

    fn graph() -> SnapshotGraph {
        let mut b = GraphBuilder::new();
        b.add_iri_triple("http://x/a", "http://p/p", "http://x/b");
        b.add_iri_triple("http://x/a", "http://p/p", "http://x/c");
        b.add_iri_triple("http://x/a", "http://p/q", "http://x/c");
        b.add_iri_triple("http://x/d", "http://p/q", "http://x/a");
        b.add_iri_triple("http://x/d", "http://p/p", "http://x/a");
        b.add_iri_triple(
            "http://x/d",
            "http://www.w3.org/1999/02/22-rdf-syntax-ns#type",
            "http://x/T",
        );
        b.finish("t0")
    }

    #[test]
    fn rows_are_predicate_sets() {
        let g = graph();
        let s = summarize(&g, SummaryModel::Ac1, SummaryOptions::default());
        let mut pv = PredicateVocabulary::new();
        let mut cv = ClassVocabulary::new();
        extend_vocabularies(&s.graph, &mut pv, &mut cv);
        assert_eq!(pv.width(), 2);
        let f = encode_features(&g, &pv, SummaryOptions::default()).unwrap();
        let a = g.iri_vertex("http://x/a").unwrap();
        let d = g.iri_vertex("http://x/d").unwrap();
        let b = g.iri_vertex("http://x/b").unwrap();
        assert_eq!(f.row(a), &[0, 1]);
        assert_eq!(f.row(a), f.row(d));
        assert!(f.row(b).is_empty());
        let dense = f.dense(&[a, b], 2);
        assert_eq!(dense.row(0), &[1.0, 1.0]);
        assert_eq!(dense.row(1), &[0.0, 0.0]);
        assert_eq!(f.dense(&[a], 1).row(0), &[1.0]);
        let labels = class_labels(&s, &cv).unwrap();
        assert_eq!(labels[a], labels[d]);
        assert_ne!(labels[a], labels[b]);
    }

    #[test]
    fn missing_predicate_is_an_error() {
        let g = graph();
        let mut pv = PredicateVocabulary::new();
        pv.extend(["http://p/p"]);
        assert!(encode_features(&g, &pv, SummaryOptions::default()).is_err());
    }
}
