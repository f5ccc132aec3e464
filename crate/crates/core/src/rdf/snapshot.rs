use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use super::ntriples::{intern, parse_statement, RawStatement, SkipReason, Triple};
use super::term::{TermId, TermKind, TermTable};
use crate::error::{Error, Result};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Sentinel for "no local vertex" in the term → vertex slot map.
const NO_VERTEX: u32 = u32::MAX;

/// Outgoing edge of a vertex. `target` is the local vertex index of the object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutEdge {
    pub predicate: TermId,
    pub target: u32,
}

/// Line accounting for one snapshot load.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub lines: u64,
    pub statements: u64,
    pub comments: u64,
    pub blank: u64,
    pub malformed: u64,
    pub duplicates: u64,
    pub malformed_reasons: BTreeMap<String, u64>,
}

impl LoadStats {
    /// Malformed plus duplicate lines.
    pub fn skipped_lines(&self) -> u64 {
        self.malformed + self.duplicates
    }

    fn record_skip(&mut self, reason: SkipReason) {
        match reason {
            SkipReason::Comment => self.comments += 1,
            SkipReason::Blank => self.blank += 1,
            SkipReason::Malformed(why) => {
                self.malformed += 1;
                *self.malformed_reasons.entry(why.to_string()).or_default() += 1;
            }
        }
    }
}

/// One timestamped snapshot: an interned, deduplicated, directed multigraph
/// with labeled edges in compressed sparse row form.
///
/// Vertices are the terms that occur as subject or object. They are addressed
/// by a dense local index `0..vertex_count()` ordered by term id, so sorting
/// edges by local target index is the same as sorting by object term id.
#[derive(Debug, Clone)]
pub struct SnapshotGraph {
    timestamp: String,
    terms: Arc<TermTable>,
    vertices: Vec<TermId>,
    slot: Vec<u32>,
    offsets: Vec<usize>,
    edges: Vec<OutEdge>,
    predicates: Vec<TermId>,
    rdf_type: Option<TermId>,
    stats: LoadStats,
}

impl SnapshotGraph {
    pub fn timestamp(&self) -> &str {
        &self.timestamp
    }

    pub fn terms(&self) -> &TermTable {
        &self.terms
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of (deduplicated) edges, including rdf:type edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn stats(&self) -> &LoadStats {
        &self.stats
    }

    pub fn skipped_lines(&self) -> u64 {
        self.stats.skipped_lines()
    }

    pub fn vertex_term(&self, v: usize) -> TermId {
        self.vertices[v]
    }

    pub fn vertex_terms(&self) -> &[TermId] {
        &self.vertices
    }

    pub fn vertex_lexical(&self, v: usize) -> &str {
        self.terms.lexical(self.vertices[v])
    }

    pub fn local_index(&self, term: TermId) -> Option<usize> {
        match self.slot.get(term.index()) {
            Some(&s) if s != NO_VERTEX => Some(s as usize),
            _ => None,
        }
    }

    /// Local index of the vertex with the given IRI.
    pub fn iri_vertex(&self, iri: &str) -> Option<usize> {
        self.terms.get(TermKind::Iri, iri).and_then(|t| self.local_index(t))
    }

    /// All outgoing edges of `v`, sorted by (predicate id, object id).
    pub fn out_edges(&self, v: usize) -> &[OutEdge] {
        &self.edges[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Outgoing edges that take part in summarization and feature encoding.
    pub fn considered_edges(&self, v: usize, include_rdf_type: bool) -> impl Iterator<Item = &OutEdge> + '_ {
        let skip = if include_rdf_type { None } else { self.rdf_type };
        self.out_edges(v).iter().filter(move |e| Some(e.predicate) != skip)
    }

    /// The predicate set R_t, sorted by term id.
    pub fn predicates(&self) -> &[TermId] {
        &self.predicates
    }

    pub fn rdf_type(&self) -> Option<TermId> {
        self.rdf_type
    }

    pub fn is_rdf_type(&self, p: TermId) -> bool {
        Some(p) == self.rdf_type
    }

    pub fn predicate_iri(&self, p: TermId) -> &str {
        self.terms.lexical(p)
    }

    /// Parse an in-memory N-Triples/N-Quads document.
    pub fn from_ntriples(text: &str, timestamp: &str) -> SnapshotGraph {
        let mut b = GraphBuilder::new();
        for line in text.lines() {
            b.add_line(line, None);
        }
        b.finish(timestamp)
    }

    /// Iterate all edges as triples of term ids.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        (0..self.vertex_count()).flat_map(move |v| {
            self.out_edges(v).iter().map(move |e| Triple {
                subject: self.vertices[v],
                predicate: e.predicate,
                object: self.vertices[e.target as usize],
            })
        })
    }

    /// Write every edge as an N-Triples line, in vertex order.
    pub fn write_ntriples<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let term = |id: TermId| -> String {
            let t = self.terms.lexical(id);
            match self.terms.kind(id) {
                TermKind::Iri => format!("<{t}>"),
                TermKind::Blank | TermKind::Literal => t.to_string(),
            }
        };
        for t in self.triples() {
            writeln!(out, "{} {} {} .", term(t.subject), term(t.predicate), term(t.object))?;
        }
        Ok(())
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut indeg = vec![0usize; self.vertex_count()];
        for e in &self.edges {
            indeg[e.target as usize] += 1;
        }
        indeg
    }
}

/// Accumulates statements and produces a deduplicated [`SnapshotGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    terms: TermTable,
    triples: Vec<(u32, u32, u32)>,
    stats: LoadStats,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse one line. `blank_scope` distinguishes blank labels of different
    /// files that make up one snapshot.
    pub fn add_line(&mut self, line: &str, blank_scope: Option<&str>) {
        self.stats.lines += 1;
        match parse_statement(line) {
            Ok(st) => self.add_statement(st, blank_scope),
            Err(reason) => self.stats.record_skip(reason),
        }
    }

    pub fn add_statement(&mut self, st: RawStatement<'_>, blank_scope: Option<&str>) {
        let s = intern(&mut self.terms, st.subject, blank_scope);
        let p = intern(&mut self.terms, st.predicate, blank_scope);
        let o = intern(&mut self.terms, st.object, blank_scope);
        self.stats.statements += 1;
        self.triples.push((s.0, p.0, o.0));
    }

    /// Add a triple of IRIs directly (used by generators and benchmarks).
    pub fn add_iri_triple(&mut self, s: &str, p: &str, o: &str) {
        let s = self.terms.intern(TermKind::Iri, s);
        let p = self.terms.intern(TermKind::Iri, p);
        let o = self.terms.intern(TermKind::Iri, o);
        self.stats.statements += 1;
        self.triples.push((s.0, p.0, o.0));
    }

    pub fn terms_mut(&mut self) -> &mut TermTable {
        &mut self.terms
    }

    pub fn add_triple(&mut self, t: Triple) {
        self.stats.statements += 1;
        self.triples.push((t.subject.0, t.predicate.0, t.object.0));
    }

    pub fn finish(self, timestamp: &str) -> SnapshotGraph {
        let GraphBuilder {
            terms,
            mut triples,
            mut stats,
        } = self;
        let before = triples.len();
        triples.sort_unstable();
        triples.dedup();
        stats.duplicates += (before - triples.len()) as u64;

        let n_terms = terms.len();
        let mut is_vertex = vec![false; n_terms];
        let mut is_pred = vec![false; n_terms];
        for &(s, p, o) in &triples {
            is_vertex[s as usize] = true;
            is_vertex[o as usize] = true;
            is_pred[p as usize] = true;
        }
        assemble(
            timestamp.to_string(),
            Arc::new(terms),
            &is_vertex,
            &is_pred,
            &triples,
            stats,
        )
    }
}

fn assemble(
    timestamp: String,
    terms: Arc<TermTable>,
    is_vertex: &[bool],
    is_pred: &[bool],
    sorted_triples: &[(u32, u32, u32)],
    stats: LoadStats,
) -> SnapshotGraph {
    let mut slot = vec![NO_VERTEX; terms.len()];
    let mut vertices = Vec::new();
    for (t, &keep) in is_vertex.iter().enumerate() {
        if keep {
            slot[t] = vertices.len() as u32;
            vertices.push(TermId(t as u32));
        }
    }
    let predicates: Vec<TermId> = is_pred
        .iter()
        .enumerate()
        .filter(|(_, &p)| p)
        .map(|(t, _)| TermId(t as u32))
        .collect();

    let mut offsets = vec![0usize; vertices.len() + 1];
    for &(s, _, _) in sorted_triples {
        offsets[slot[s as usize] as usize + 1] += 1;
    }
    for i in 0..vertices.len() {
        offsets[i + 1] += offsets[i];
    }
    // Triples are sorted by (s, p, o) and local slots are monotone in term id,
    // so a straight copy lands every row already sorted.
    let edges: Vec<OutEdge> = sorted_triples
        .iter()
        .map(|&(_, p, o)| OutEdge {
            predicate: TermId(p),
            target: slot[o as usize],
        })
        .collect();

    let rdf_type = terms
        .get(TermKind::Iri, RDF_TYPE)
        .filter(|t| is_pred.get(t.index()).copied().unwrap_or(false));

    SnapshotGraph {
        timestamp,
        terms,
        vertices,
        slot,
        offsets,
        edges,
        predicates,
        rdf_type,
        stats,
    }
}

/// Which incident edges count towards a vertex's degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeMode {
    #[default]
    Total,
    Out,
    In,
}

impl std::str::FromStr for DegreeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(DegreeMode::Total),
            "out" => Ok(DegreeMode::Out),
            "in" => Ok(DegreeMode::In),
            other => Err(Error::Config(format!("unknown degree mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for DegreeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DegreeMode::Total => "total",
            DegreeMode::Out => "out",
            DegreeMode::In => "in",
        })
    }
}

/// Remove every vertex whose degree exceeds `cap`, with all incident edges.
///
/// Degrees are measured once on the input; removal does not cascade. `None`
/// means no cap. Vertices that lose all their edges stay in the graph.
pub fn filter_high_degree(g: &SnapshotGraph, cap: Option<usize>, mode: DegreeMode) -> SnapshotGraph {
    let Some(cap) = cap else {
        return g.clone();
    };
    let n = g.vertex_count();
    let indeg = g.in_degrees();
    let removed: Vec<bool> = (0..n)
        .map(|v| {
            let out = g.out_edges(v).len();
            let deg = match mode {
                DegreeMode::Total => out + indeg[v],
                DegreeMode::Out => out,
                DegreeMode::In => indeg[v],
            };
            deg > cap
        })
        .collect();

    let mut is_vertex = vec![false; g.terms.len()];
    for v in 0..n {
        if !removed[v] {
            is_vertex[g.vertices[v].index()] = true;
        }
    }
    let mut triples = Vec::with_capacity(g.edge_count());
    let mut is_pred = vec![false; g.terms.len()];
    for v in 0..n {
        if removed[v] {
            continue;
        }
        for e in g.out_edges(v) {
            if !removed[e.target as usize] {
                is_pred[e.predicate.index()] = true;
                triples.push((g.vertices[v].0, e.predicate.0, g.vertices[e.target as usize].0));
            }
        }
    }
    assemble(
        g.timestamp.clone(),
        Arc::clone(&g.terms),
        &is_vertex,
        &is_pred,
        &triples,
        g.stats.clone(),
    )
}

/// Load a snapshot from a file or a directory of files.
///
/// Files ending in `.gz` are decompressed. In a directory, files are read in
/// lexical order and blank node labels are scoped per file.
pub fn load_snapshot(path: &Path, timestamp: &str) -> Result<SnapshotGraph> {
    let files = snapshot_files(path)?;
    let mut builder = GraphBuilder::new();
    let scoped = files.len() > 1;
    for (i, file) in files.iter().enumerate() {
        let scope = scoped.then(|| format!("f{i}"));
        read_into(&mut builder, file, scope.as_deref())?;
    }
    Ok(builder.finish(timestamp))
}

fn snapshot_files(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path, 0, e))?;
    if !meta.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(|e| Error::io(path, 0, e))? {
        let entry = entry.map_err(|e| Error::io(path, 0, e))?;
        let p = entry.path();
        let hidden = p
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with('.'));
        if p.is_file() && !hidden {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn read_into(builder: &mut GraphBuilder, path: &Path, scope: Option<&str>) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, 0, e))?;
    let gz = path.extension().is_some_and(|e| e == "gz");
    let reader: Box<dyn Read> = if gz {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    let mut reader = BufReader::with_capacity(1 << 16, reader);
    let mut buf = Vec::with_capacity(256);
    let mut offset = 0u64;
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(path, offset, e))?;
        if n == 0 {
            break;
        }
        offset += n as u64;
        match std::str::from_utf8(&buf) {
            Ok(line) => builder.add_line(line, scope),
            Err(_) => {
                builder.stats.lines += 1;
                builder.stats.record_skip(SkipReason::Malformed("invalid UTF-8"));
            }
        }
    }
    Ok(())
}
