use std::collections::{BTreeMap, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rdf::SnapshotGraph;
use crate::tensor::Tensor;

use super::encode::FeatureMatrix;
use super::split::{Split, SplitTag};

/// Default maximum number of vertices per batch.
pub const DEFAULT_BATCH_CAP: usize = 1000;

/// Directed batch edge between batch positions. `predicate` is the input
/// column of the edge label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BatchEdge {
    pub source: u32,
    pub predicate: u32,
    pub target: u32,
}

/// A sampled subgraph. Positions `0..targets` are the labeled targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    /// Snapshot-local vertex of each original position.
    pub vertices: Vec<usize>,
    pub targets: usize,
    pub edges: Vec<BatchEdge>,
    /// Active input columns per position, including edge vertices.
    pub feature_rows: Vec<Vec<u32>>,
    pub labels: Vec<u32>,
    pub hops: usize,
    pub edge_as_vertex: bool,
}

impl Subgraph {
    /// Number of positions, edge vertices included.
    pub fn len(&self) -> usize {
        self.feature_rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feature_rows.is_empty()
    }

    pub fn features(&self, width: usize) -> Tensor {
        let mut t = Tensor::zeros(self.len(), width);
        for (i, cols) in self.feature_rows.iter().enumerate() {
            let row = t.row_mut(i);
            for &c in cols {
                if (c as usize) < width {
                    row[c as usize] = 1.0;
                }
            }
        }
        t
    }
}

/// Inverse-frequency class weights over the classes present in `labels`,
/// normalized to sum 1.
pub fn class_weights(labels: &[u32]) -> Result<BTreeMap<u32, f64>> {
    if labels.is_empty() {
        return Err(Error::Invalid("no training vertices".into()));
    }
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in labels {
        *counts.entry(c).or_default() += 1;
    }
    let total: f64 = counts.values().map(|&n| 1.0 / n as f64).sum();
    Ok(counts.into_iter().map(|(c, n)| (c, 1.0 / n as f64 / total)).collect())
}

/// Per-vertex draw probabilities proportional to the class weight, so every
/// class present is drawn equally often in expectation.
pub fn vertex_probabilities(labels: &[u32]) -> Result<Vec<f64>> {
    let w = class_weights(labels)?;
    let mass: f64 = labels.iter().map(|c| w[c]).sum();
    Ok(labels.iter().map(|c| w[c] / mass).collect())
}

/// Vertices reachable from `start` in at most `hops` considered out-edges,
/// in breadth-first order starting with `start`.
pub fn out_closure(g: &SnapshotGraph, start: usize, hops: usize, include_rdf_type: bool) -> Vec<usize> {
    let mut seen = vec![start];
    let mut frontier = 0;
    for _ in 0..hops {
        let end = seen.len();
        for i in frontier..end {
            let v = seen[i];
            for e in g.considered_edges(v, include_rdf_type) {
                let t = e.target as usize;
                if !seen.contains(&t) {
                    seen.push(t);
                }
            }
        }
        frontier = end;
    }
    seen
}

/// Incremental batch assembly under the cap rule.
struct Assembly {
    targets: Vec<usize>,
    context: Vec<usize>,
    member: HashMap<usize, bool>,
}

impl Assembly {
    fn new() -> Self {
        Self {
            targets: Vec::new(),
            context: Vec::new(),
            member: HashMap::new(),
        }
    }

    fn size(&self) -> usize {
        self.member.len()
    }

    /// Add `t` with its closure unless that would overflow `cap`. The first
    /// target is always accepted.
    fn offer(&mut self, t: usize, closure: &[usize], cap: usize) -> bool {
        let fresh = closure.iter().filter(|v| !self.member.contains_key(v)).count();
        if !self.targets.is_empty() && self.size() + fresh > cap {
            return false;
        }
        for &v in closure {
            self.member.entry(v).or_insert_with(|| {
                self.context.push(v);
                false
            });
        }
        self.member.insert(t, true);
        self.targets.push(t);
        true
    }

    fn finish(self, g: &SnapshotGraph, features: &FeatureMatrix, labels: &[u32], hops: usize) -> Subgraph {
        let mut vertices = self.targets;
        let targets = vertices.len();
        vertices.extend(self.context.into_iter().filter(|v| !self.member[v]));
        let mut position = HashMap::with_capacity(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            position.insert(v, i as u32);
        }
        let mut edges = Vec::new();
        for (i, &v) in vertices.iter().enumerate() {
            for e in g.considered_edges(v, features.include_rdf_type()) {
                if let Some(&j) = position.get(&(e.target as usize)) {
                    let predicate = features
                        .predicate_column(e.predicate)
                        .expect("encoded predicates cover the snapshot");
                    edges.push(BatchEdge {
                        source: i as u32,
                        predicate,
                        target: j,
                    });
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Subgraph {
            feature_rows: vertices.iter().map(|&v| features.row(v).to_vec()).collect(),
            labels: vertices[..targets].iter().map(|&v| labels[v]).collect(),
            vertices,
            targets,
            edges,
            hops,
            edge_as_vertex: false,
        }
    }
}

/// Class-balanced sampler of capped k-hop batches over the training split.
#[derive(Debug, Clone)]
pub struct BatchSampler<'a> {
    g: &'a SnapshotGraph,
    features: &'a FeatureMatrix,
    labels: &'a [u32],
    train: Vec<usize>,
    dist: WeightedIndex<f64>,
    hops: usize,
    cap: usize,
}

impl<'a> BatchSampler<'a> {
    pub fn new(
        g: &'a SnapshotGraph,
        features: &'a FeatureMatrix,
        labels: &'a [u32],
        split: &Split,
        hops: usize,
        cap: usize,
    ) -> Result<Self> {
        if hops > 2 {
            return Err(Error::Config(format!("batch hops must be at most 2, got {hops}")));
        }
        if cap == 0 {
            return Err(Error::Config("batch cap must be at least 1".into()));
        }
        let train = split.vertices(SplitTag::Train);
        let train_labels: Vec<u32> = train.iter().map(|&v| labels[v]).collect();
        let probs = vertex_probabilities(&train_labels).map_err(|_| Error::Invalid("empty training split".into()))?;
        let dist = WeightedIndex::new(&probs).map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(Self {
            g,
            features,
            labels,
            train,
            dist,
            hops,
            cap,
        })
    }

    /// One class-weighted draw from the training split.
    pub fn draw_target<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.train[self.dist.sample(rng)]
    }

    pub fn train_vertices(&self) -> &[usize] {
        &self.train
    }

    /// Draw up to `cap` targets with replacement, stopping at the first whose
    /// closure would overflow the cap.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Subgraph {
        let mut a = Assembly::new();
        let include = self.features.include_rdf_type();
        for _ in 0..self.cap {
            let t = self.draw_target(rng);
            if a.member.get(&t) == Some(&true) {
                continue;
            }
            let closure = out_closure(self.g, t, self.hops, include);
            if !a.offer(t, &closure, self.cap) {
                break;
            }
        }
        a.finish(self.g, self.features, self.labels, self.hops)
    }
}

pub fn sample_batch<R: Rng + ?Sized>(
    g: &SnapshotGraph,
    features: &FeatureMatrix,
    labels: &[u32],
    split: &Split,
    hops: usize,
    cap: usize,
    rng: &mut R,
) -> Result<Subgraph> {
    Ok(BatchSampler::new(g, features, labels, split, hops, cap)?.sample(rng))
}

/// Cover `targets` in order with batches obeying the cap rule.
pub fn target_batches(
    g: &SnapshotGraph,
    features: &FeatureMatrix,
    labels: &[u32],
    targets: &[usize],
    hops: usize,
    cap: usize,
) -> Vec<Subgraph> {
    let include = features.include_rdf_type();
    let mut out = Vec::new();
    let mut a = Assembly::new();
    for &t in targets {
        if a.member.get(&t) == Some(&true) {
            continue;
        }
        let closure = out_closure(g, t, hops, include);
        if !a.offer(t, &closure, cap) {
            out.push(std::mem::replace(&mut a, Assembly::new()).finish(g, features, labels, hops));
            a.offer(t, &closure, cap);
        }
    }
    if !a.targets.is_empty() {
        out.push(a.finish(g, features, labels, hops));
    }
    out
}

/// Replace every edge `(u, p, v)` by `u → e → v` where the new vertex `e`
/// carries the one-hot feature of `p`.
pub fn edge_as_vertex_transform(b: &Subgraph) -> Result<Subgraph> {
    if b.hops != 2 {
        return Err(Error::Config(format!(
            "edge-as-vertex batches need 2 hops, got {}",
            b.hops
        )));
    }
    if b.edge_as_vertex {
        return Err(Error::Config("batch is already transformed".into()));
    }
    let n = b.len() as u32;
    let mut out = b.clone();
    out.edges = Vec::with_capacity(2 * b.edges.len());
    for (k, e) in b.edges.iter().enumerate() {
        let ev = n + k as u32;
        out.feature_rows.push(vec![e.predicate]);
        out.edges.push(BatchEdge {
            source: e.source,
            predicate: e.predicate,
            target: ev,
        });
        out.edges.push(BatchEdge {
            source: ev,
            predicate: e.predicate,
            target: e.target,
        });
    }
    out.edge_as_vertex = true;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{encode_features, split_vertices, PredicateVocabulary};
    use crate::rdf::GraphBuilder;
    use crate::summary::SummaryOptions;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn encoded(g: &SnapshotGraph) -> FeatureMatrix {
        let mut pv = PredicateVocabulary::new();
        pv.extend(g.predicates().iter().map(|&p| g.predicate_iri(p)));
        encode_features(g, &pv, SummaryOptions::default()).unwrap()
    }

    fn all_train(n: usize) -> Split {
        Split::from_tags(vec![SplitTag::Train; n])
    }

    #[test]
    fn class_weights_are_inverse_frequency() {
        let w = class_weights(&[0, 0, 0, 1]).unwrap();
        assert!((w[&0] - 0.25).abs() < 1e-15 && (w[&1] - 0.75).abs() < 1e-15);
        let p = vertex_probabilities(&[0, 0, 0, 1]).unwrap();
        assert!((p[0] * 3.0 - 0.5).abs() < 1e-15 && (p[3] - 0.5).abs() < 1e-15);
        let u = class_weights(&[4, 5, 6]).unwrap();
        assert!(u.values().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(class_weights(&[2, 2]).unwrap()[&2], 1.0);
        assert!(class_weights(&[]).is_err());
    }

    #[test]
    fn small_graph_fits_in_one_batch() {
        let mut b = GraphBuilder::new();
        for i in 0..49 {
            b.add_iri_triple(&format!("http://x/{i}"), "http://p", &format!("http://x/{}", i + 1));
        }
        let g = b.finish("t");
        let f = encoded(&g);
        let labels = vec![0; g.vertex_count()];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_batch(&g, &f, &labels, &all_train(50), 1, 1000, &mut rng).unwrap();
        assert!(s.len() <= 50);
        assert_eq!(s.labels.len(), s.targets);
        let again = sample_batch(
            &g,
            &f,
            &labels,
            &all_train(50),
            1,
            1000,
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn oversize_single_target_is_kept() {
        // a -> 5 hubs, each hub -> 5 leaves: 2-hop closure of a has 31 vertices.
        let mut b = GraphBuilder::new();
        for h in 0..5 {
            b.add_iri_triple("http://x/a", "http://p", &format!("http://x/h{h}"));
            for l in 0..5 {
                b.add_iri_triple(&format!("http://x/h{h}"), "http://q", &format!("http://x/l{h}{l}"));
            }
        }
        let g = b.finish("t");
        let f = encoded(&g);
        let a = g.iri_vertex("http://x/a").unwrap();
        let mut tags = vec![SplitTag::Test; g.vertex_count()];
        tags[a] = SplitTag::Train;
        let labels = vec![0; g.vertex_count()];
        let s = sample_batch(
            &g,
            &f,
            &labels,
            &Split::from_tags(tags),
            2,
            10,
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert_eq!(s.targets, 1);
        assert_eq!(s.vertices[0], a);
        assert_eq!(s.len(), 31);
        assert_eq!(s.edges.len(), 30);
    }

    #[test]
    fn closures_are_complete_and_cap_respected() {
        let mut b = GraphBuilder::new();
        for i in 0..300u32 {
            for j in 1..=3u32 {
                b.add_iri_triple(
                    &format!("http://x/{i}"),
                    &format!("http://p{}", j % 2),
                    &format!("http://x/{}", (i * 7 + j * 13) % 300),
                );
            }
        }
        let g = b.finish("t");
        let f = encoded(&g);
        let labels: Vec<u32> = (0..g.vertex_count() as u32).map(|v| v % 5).collect();
        let split = split_vertices(&g, 9);
        let sampler = BatchSampler::new(&g, &f, &labels, &split, 2, 60).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let s = sampler.sample(&mut rng);
            assert!(s.len() <= 60);
            for &t in &s.vertices[..s.targets] {
                assert_eq!(split.tag(t), SplitTag::Train);
                for v in out_closure(&g, t, 2, false) {
                    assert!(s.vertices.contains(&v));
                }
            }
        }
    }

    #[test]
    fn edge_vertices_are_one_hot() {
        let mut b = GraphBuilder::new();
        b.add_iri_triple("http://x/a", "http://p", "http://x/b");
        b.add_iri_triple("http://x/b", "http://q", "http://x/c");
        let g = b.finish("t");
        let f = encoded(&g);
        let labels = vec![0; 3];
        let s = target_batches(&g, &f, &labels, &[0, 1, 2], 2, 100).remove(0);
        let t = edge_as_vertex_transform(&s).unwrap();
        assert_eq!(t.len(), s.len() + s.edges.len());
        assert_eq!(t.edges.len(), 2 * s.edges.len());
        for (k, e) in s.edges.iter().enumerate() {
            assert_eq!(t.feature_rows[s.len() + k], vec![e.predicate]);
        }
        assert_eq!(t.labels, s.labels);
        let one = target_batches(&g, &f, &labels, &[0], 1, 100).remove(0);
        assert!(edge_as_vertex_transform(&one).is_err());
        let empty = Subgraph {
            edges: vec![],
            ..s.clone()
        };
        let same = edge_as_vertex_transform(&empty).unwrap();
        assert_eq!(same.feature_rows, empty.feature_rows);
    }
}
