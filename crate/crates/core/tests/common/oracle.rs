//! Test-only oracles, independent of the library's implementation paths.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumlife_core::rdf::{GraphBuilder, SnapshotGraph};

/// Straight transcription of the SipHash-2-4 reference algorithm.
pub fn siphash24(key: &[u8; 16], msg: &[u8]) -> u64 {
    let k0 = u64::from_le_bytes(key[0..8].try_into().unwrap());
    let k1 = u64::from_le_bytes(key[8..16].try_into().unwrap());
    let mut v0 = k0 ^ 0x736f6d6570736575;
    let mut v1 = k1 ^ 0x646f72616e646f6d;
    let mut v2 = k0 ^ 0x6c7967656e657261;
    let mut v3 = k1 ^ 0x7465646279746573;

    fn round(v0: &mut u64, v1: &mut u64, v2: &mut u64, v3: &mut u64) {
        *v0 = v0.wrapping_add(*v1);
        *v1 = v1.rotate_left(13);
        *v1 ^= *v0;
        *v0 = v0.rotate_left(32);
        *v2 = v2.wrapping_add(*v3);
        *v3 = v3.rotate_left(16);
        *v3 ^= *v2;
        *v0 = v0.wrapping_add(*v3);
        *v3 = v3.rotate_left(21);
        *v3 ^= *v0;
        *v2 = v2.wrapping_add(*v1);
        *v1 = v1.rotate_left(17);
        *v1 ^= *v2;
        *v2 = v2.rotate_left(32);
    }

    let blocks = msg.len() / 8;
    for i in 0..blocks {
        let m = u64::from_le_bytes(msg[i * 8..i * 8 + 8].try_into().unwrap());
        v3 ^= m;
        round(&mut v0, &mut v1, &mut v2, &mut v3);
        round(&mut v0, &mut v1, &mut v2, &mut v3);
        v0 ^= m;
    }
    let mut last = [0u8; 8];
    let tail = &msg[blocks * 8..];
    last[..tail.len()].copy_from_slice(tail);
    last[7] = (msg.len() & 0xff) as u8;
    let m = u64::from_le_bytes(last);
    v3 ^= m;
    round(&mut v0, &mut v1, &mut v2, &mut v3);
    round(&mut v0, &mut v1, &mut v2, &mut v3);
    v0 ^= m;
    v2 ^= 0xff;
    for _ in 0..4 {
        round(&mut v0, &mut v1, &mut v2, &mut v3);
    }
    v0 ^ v1 ^ v2 ^ v3
}

/// k rounds of partition refinement over outgoing (predicate, block) sets.
///
/// Round 0 puts every vertex in one block; in round r + 1 two vertices share a
/// block iff their sets of (predicate, round-r block of target) are equal.
/// Returns a block id per local vertex of `g`. rdf:type edges are skipped.
pub fn bisimulation_blocks(g: &SnapshotGraph, k: usize) -> Vec<usize> {
    let n = g.vertex_count();
    let mut out: Vec<Vec<(String, usize)>> = vec![Vec::new(); n];
    for t in g.triples() {
        let p = g.terms().lexical(t.predicate).to_string();
        if p == sumlife_core::rdf::RDF_TYPE {
            continue;
        }
        let s = g.local_index(t.subject).unwrap();
        let o = g.local_index(t.object).unwrap();
        out[s].push((p, o));
    }
    let mut block = vec![0usize; n];
    for _ in 0..k {
        let mut ids: BTreeMap<BTreeSet<(String, usize)>, usize> = BTreeMap::new();
        let mut next = vec![0usize; n];
        for v in 0..n {
            let sig: BTreeSet<(String, usize)> = out[v].iter().map(|(p, o)| (p.clone(), block[*o])).collect();
            let len = ids.len();
            next[v] = *ids.entry(sig).or_insert(len);
        }
        block = next;
    }
    block
}

/// Whether two labelings induce the same partition.
pub fn same_partition<A: Ord + Copy, B: Ord + Copy>(a: &[A], b: &[B]) -> bool {
    assert_eq!(a.len(), b.len());
    let mut fwd: BTreeMap<A, B> = BTreeMap::new();
    let mut back: BTreeMap<B, A> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if *fwd.entry(x).or_insert(y) != y || *back.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}

/// Whether partition `fine` refines partition `coarse`.
pub fn refines<A: Ord + Copy, B: Ord + Copy>(fine: &[A], coarse: &[B]) -> bool {
    let mut map: BTreeMap<A, B> = BTreeMap::new();
    fine.iter().zip(coarse).all(|(&f, &c)| *map.entry(f).or_insert(c) == c)
}

/// Random multigraph with at most `max_v` vertices, `max_e` edges and
/// `max_p` predicates. Small vocabularies keep classes non-trivial.
pub fn random_graph(seed: u64, max_v: usize, max_e: usize, max_p: usize) -> SnapshotGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_v);
    let m = rng.gen_range(1..=max_e);
    let preds = rng.gen_range(1..=max_p);
    // Bias towards sinks so that many vertices share low-level classes.
    let sink_share = rng.gen_range(0.1..0.6);
    let sources = ((n as f64) * (1.0 - sink_share)).ceil().max(1.0) as usize;
    let mut b = GraphBuilder::new();
    for _ in 0..m {
        let s = rng.gen_range(0..sources);
        let o = rng.gen_range(0..n);
        let p = rng.gen_range(0..preds);
        b.add_iri_triple(
            &format!("http://ex.org/v{s}"),
            &format!("http://ex.org/p{p}"),
            &format!("http://ex.org/v{o}"),
        );
    }
    b.finish("t")
}
