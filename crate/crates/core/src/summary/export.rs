//! TSV exports of vertex labels and summary edges.

use std::io::{BufRead, Write};

use super::eqc::{ExtensionMap, Summary, SummaryGraph};
use super::hash::EqcHash;
use crate::error::{Error, Result};
use crate::rdf::{SnapshotGraph, TermKind, TermTable};

/// Tabs and line breaks inside literals would break the TSV framing.
fn escape_tsv(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains(['\t', '\n', '\r']) {
        s.replace('\t', "\\t").replace('\n', "\\n").replace('\r', "\\r").into()
    } else {
        s.into()
    }
}

/// `vertex<TAB>eqc-hash-hex`, one line per vertex, sorted by vertex text.
pub fn write_vertex_eqcs<W: Write>(g: &SnapshotGraph, summary: &Summary, mut out: W) -> std::io::Result<()> {
    let mut rows: Vec<(&str, EqcHash)> = (0..g.vertex_count())
        .map(|v| (g.vertex_lexical(v), summary.vertex_eqc[v]))
        .collect();
    rows.sort_unstable();
    for (vertex, h) in rows {
        writeln!(out, "{}\t{}", escape_tsv(vertex), h)?;
    }
    Ok(())
}

/// `source-eqc<TAB>predicate<TAB>child-eqc`, one line per summary edge.
pub fn write_summary_edges<W: Write>(s: &SummaryGraph, mut out: W) -> std::io::Result<()> {
    for e in &s.edges {
        writeln!(
            out,
            "{}\t{}\t{}",
            e.source,
            escape_tsv(&s.predicates[e.predicate as usize]),
            e.child
        )?;
    }
    Ok(())
}

/// Read a vertex/EQC TSV back into an extension map. Member ids refer to the
/// returned term table.
pub fn read_vertex_eqcs<R: BufRead>(input: R) -> Result<(ExtensionMap, TermTable)> {
    let mut table = TermTable::new();
    let mut assignments = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Invalid(format!("line {}: {e}", n + 1)))?;
        if line.is_empty() {
            continue;
        }
        let (vertex, hash) = line
            .rsplit_once('\t')
            .ok_or_else(|| Error::Invalid(format!("line {}: expected two columns", n + 1)))?;
        let h = EqcHash::from_hex(hash).ok_or_else(|| Error::Invalid(format!("line {}: bad hash {hash:?}", n + 1)))?;
        assignments.push((h, table.intern(TermKind::Iri, vertex)));
    }
    Ok((ExtensionMap::from_assignments(assignments), table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::{summarize, SummaryModel, SummaryOptions};

    #[test]
    fn vertex_tsv_round_trips_extensions() {
        let text = "<http://a> <http://p> \"x\\ty\" .\n<http://b> <http://p> <http://c> .\n";
        let g = SnapshotGraph::from_ntriples(text, "t");
        let s = summarize(&g, SummaryModel::Ac1, SummaryOptions::default());
        let mut buf = Vec::new();
        write_vertex_eqcs(&g, &s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().all(|l| l.split('\t').count() == 2));
        let (ext, _) = read_vertex_eqcs(buf.as_slice()).unwrap();
        assert_eq!(ext.total(), 4);
        for (q, m) in s.extension.iter() {
            assert_eq!(ext.ext(q), m.len());
        }
    }

    #[test]
    fn summary_edge_tsv_has_three_columns() {
        let g = SnapshotGraph::from_ntriples("<http://a> <http://p> <http://b> .\n", "t");
        let s = summarize(&g, SummaryModel::Ac2, SummaryOptions::default());
        let mut buf = Vec::new();
        write_summary_edges(&s.graph, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cols: Vec<&str> = text.trim_end().split('\t').collect();
        assert_eq!(cols[1], "http://p");
        assert_eq!(cols[2], "0000000000000000");
    }
}
