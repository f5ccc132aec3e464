use std::hash::Hasher;

use siphasher::sip::SipHasher24;

use crate::rdf::SnapshotGraph;

/// Percentages of the train, validation and test partitions.
pub const SPLIT_PERCENT: [usize; 3] = [93, 2, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    tags: Vec<SplitTag>,
}

impl Split {
    pub fn from_tags(tags: Vec<SplitTag>) -> Self {
        Self { tags }
    }

    pub fn tag(&self, v: usize) -> SplitTag {
        self.tags[v]
    }

    pub fn tags(&self) -> &[SplitTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Local vertices carrying `tag`, ascending.
    pub fn vertices(&self, tag: SplitTag) -> Vec<usize> {
        (0..self.tags.len()).filter(|&v| self.tags[v] == tag).collect()
    }

    pub fn count(&self, tag: SplitTag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }
}

/// Partition sizes for `n` items by largest remainder; ties go to the
/// earlier partition.
pub fn split_sizes(n: usize) -> [usize; 3] {
    let mut sizes = SPLIT_PERCENT.map(|p| n * p / 100);
    let mut rest = n - sizes.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&i| std::cmp::Reverse(n * SPLIT_PERCENT[i] % 100));
    for &i in &order {
        if rest == 0 {
            break;
        }
        sizes[i] += 1;
        rest -= 1;
    }
    sizes
}

fn iri_rank(seed: u64, iri: &str) -> u64 {
    let mut h = SipHasher24::new_with_keys(seed, seed ^ 0x9e37_79b9_7f4a_7c15);
    h.write(iri.as_bytes());
    h.finish()
}

/// Rank vertices by a seeded hash of their IRI, then cut the ranking into
/// train, validation and test blocks.
pub fn split_vertices(g: &SnapshotGraph, seed: u64) -> Split {
    let n = g.vertex_count();
    let mut ranked: Vec<(u64, &str, usize)> = (0..n)
        .map(|v| {
            let iri = g.vertex_lexical(v);
            (iri_rank(seed, iri), iri, v)
        })
        .collect();
    ranked.sort_unstable();
    let [train, val, _] = split_sizes(n);
    let mut tags = vec![SplitTag::Test; n];
    for (i, &(_, _, v)) in ranked.iter().enumerate() {
        tags[v] = if i < train {
            SplitTag::Train
        } else if i < train + val {
            SplitTag::Val
        } else {
            SplitTag::Test
        };
    }
    Split { tags }
}
