//! Unary, binary and meta measures over sequences of summaries.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summary::{EqcHash, ExtensionMap, SummaryGraph, SummaryModel};

/// Compensated (Kahan) running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::default();
        for x in iter {
            k.add(x);
        }
        k
    }
}

/// `(value, frequency)` pairs, sorted by value descending.
pub type Histogram = Vec<(u64, u64)>;

fn histogram(values: impl IntoIterator<Item = u64>) -> Histogram {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts.into_iter().rev().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub eqc_count: usize,
    pub summary_edges: usize,
    pub avg_size: f64,
    pub avg_edges: f64,
    /// Number of summary edges (attributes) per EQC.
    pub dist_attrs_per_eqc: Histogram,
    /// Extension size per EQC.
    pub dist_members_per_eqc: Histogram,
    /// Number of original edges per predicate.
    pub dist_predicate_usage: Histogram,
}

/// Average EQC size and average summary edges per EQC, over primary vertices.
pub fn unary_stats(s: &SummaryGraph, ext: &ExtensionMap) -> Result<SummaryStats> {
    let classes = s.eqcs.len();
    if classes == 0 {
        return Err(Error::Invalid("empty summary has no averages".into()));
    }
    let mass: u64 = s.eqcs.iter().map(|&q| ext.ext(q) as u64).sum();

    let mut attrs: BTreeMap<EqcHash, u64> = s.eqcs.iter().map(|&q| (q, 0)).collect();
    for e in &s.edges {
        *attrs.entry(e.source).or_default() += 1;
    }

    Ok(SummaryStats {
        eqc_count: classes,
        summary_edges: s.edges.len(),
        avg_size: mass as f64 / classes as f64,
        avg_edges: s.edges.len() as f64 / classes as f64,
        dist_attrs_per_eqc: histogram(attrs.into_values()),
        dist_members_per_eqc: histogram(s.eqcs.iter().map(|&q| ext.ext(q) as u64)),
        dist_predicate_usage: histogram(s.predicate_usage.iter().copied()),
    })
}

/// 1 - |A ∩ B| / |A ∪ B| over primary EQC sets (both sorted). Two empty sets
/// have distance 0.
pub fn jaccard_dist(a: &SummaryGraph, b: &SummaryGraph) -> f64 {
    jaccard_sets(&a.eqcs, &b.eqcs)
}

pub fn jaccard_sets(a: &[EqcHash], b: &[EqcHash]) -> f64 {
    let inter = sorted_intersection(a, b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return 0.0;
    }
    1.0 - inter as f64 / union as f64
}

fn sorted_intersection(a: &[EqcHash], b: &[EqcHash]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Denominator of the per-EQC probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JsNormalization {
    /// P(q) = ext(q) / Σ ext, a proper distribution.
    #[default]
    ExtensionMass,
    /// P(q) = ext(q) / |C|, dividing by the number of summary EQCs.
    SummaryVertices,
}

impl FromStr for JsNormalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extension-mass" => Ok(JsNormalization::ExtensionMass),
            "summary-vertices" => Ok(JsNormalization::SummaryVertices),
            other => Err(Error::Config(format!("unknown js normalization {other:?}"))),
        }
    }
}

impl fmt::Display for JsNormalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JsNormalization::ExtensionMass => "extension-mass",
            JsNormalization::SummaryVertices => "summary-vertices",
        })
    }
}

fn normalizer(s: &SummaryGraph, ext: &ExtensionMap, norm: JsNormalization) -> f64 {
    match norm {
        JsNormalization::ExtensionMass => s.eqcs.iter().map(|&c| ext.ext(c) as u64).sum::<u64>() as f64,
        JsNormalization::SummaryVertices => s.eqcs.len() as f64,
    }
}

/// D(A, B) = Σ_{q ∈ B} P_A(q) log2(P_A(q) / P_B(q)); summands with
/// P_A(q) = 0 are 0.
pub fn relative_entropy(
    a: (&SummaryGraph, &ExtensionMap),
    b: (&SummaryGraph, &ExtensionMap),
    norm: JsNormalization,
) -> f64 {
    let (na, nb) = (normalizer(a.0, a.1, norm), normalizer(b.0, b.1, norm));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    b.0.eqcs
        .iter()
        .filter_map(|&q| {
            if !a.0.contains(q) {
                return None;
            }
            let pa = a.1.ext(q) as f64 / na;
            let pb = b.1.ext(q) as f64 / nb;
            (pa > 0.0 && pb > 0.0).then(|| pa * (pa / pb).log2())
        })
        .collect::<KahanSum>()
        .value()
}

/// δ_JS(A, B) = D(A, B) + D(B, A).
///
/// Each direction only sums over the EQCs of its second argument, so mass
/// outside the other summary is dropped rather than producing an infinite
/// term. This is not the textbook Jensen–Shannon divergence.
pub fn js_divergence(
    a: (&SummaryGraph, &ExtensionMap),
    b: (&SummaryGraph, &ExtensionMap),
    norm: JsNormalization,
) -> f64 {
    relative_entropy(a, b, norm) + relative_entropy(b, a, norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub jaccard: f64,
    pub js_divergence: f64,
    pub added: usize,
    pub deleted: usize,
    pub recurring: usize,
}

/// Compare summary `b` (time t+1) against `a` (time t).
pub fn diff(
    a: (&SummaryGraph, &ExtensionMap),
    b: (&SummaryGraph, &ExtensionMap),
    norm: JsNormalization,
) -> Result<DiffReport> {
    check_models(a.0.model, b.0.model)?;
    let recurring = sorted_intersection(&a.0.eqcs, &b.0.eqcs);
    Ok(DiffReport {
        jaccard: jaccard_dist(a.0, b.0),
        js_divergence: js_divergence(a, b, norm),
        added: b.0.eqcs.len() - recurring,
        deleted: a.0.eqcs.len() - recurring,
        recurring,
    })
}

fn check_models(a: SummaryModel, b: SummaryModel) -> Result<()> {
    if a != b {
        return Err(Error::Config(format!("cannot compare {a} summary with {b} summary")));
    }
    Ok(())
}

/// Per-snapshot change counts for a sequence of EQC sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaEntry {
    pub eqcs: usize,
    pub added_vs_prev: usize,
    pub deleted_vs_prev: usize,
    pub recurring_vs_prev: usize,
    pub new_vs_first: usize,
    pub gone_vs_first: usize,
    /// EQCs absent from the previous snapshot but seen in an earlier one.
    pub reappearing: usize,
    /// EQCs of the previous snapshot that are absent now.
    pub disappeared: usize,
    /// |∪_{s ≤ t} EQCs_s|.
    pub cumulative_seen: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaTrack {
    pub entries: Vec<MetaEntry>,
}

impl MetaTrack {
    pub fn cumulative_seen(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.cumulative_seen).collect()
    }
}

pub fn meta_track<'a>(seq: impl IntoIterator<Item = &'a SummaryGraph>) -> Result<MetaTrack> {
    let sets: Vec<&[EqcHash]> = seq.into_iter().map(|s| s.eqcs.as_slice()).collect();
    meta_track_sets(&sets)
}

/// Meta measures over sorted EQC sets.
pub fn meta_track_sets(sets: &[&[EqcHash]]) -> Result<MetaTrack> {
    if sets.is_empty() {
        return Err(Error::Invalid("meta track needs at least one summary".into()));
    }
    let first: HashSet<EqcHash> = sets[0].iter().copied().collect();
    let mut seen: HashSet<EqcHash> = HashSet::new();
    let mut entries = Vec::with_capacity(sets.len());
    let mut prev: HashSet<EqcHash> = HashSet::new();
    for (t, set) in sets.iter().enumerate() {
        let cur: HashSet<EqcHash> = set.iter().copied().collect();
        let recurring = if t == 0 { 0 } else { cur.intersection(&prev).count() };
        let added = cur.len() - recurring;
        let deleted = if t == 0 { 0 } else { prev.len() - recurring };
        let reappearing = if t == 0 {
            0
        } else {
            cur.iter().filter(|q| !prev.contains(q) && seen.contains(q)).count()
        };
        seen.extend(cur.iter().copied());
        entries.push(MetaEntry {
            eqcs: cur.len(),
            added_vs_prev: added,
            deleted_vs_prev: deleted,
            recurring_vs_prev: recurring,
            new_vs_first: cur.difference(&first).count(),
            gone_vs_first: first.difference(&cur).count(),
            reappearing,
            disappeared: deleted,
            cumulative_seen: seen.len(),
        });
        prev = cur;
    }
    Ok(MetaTrack { entries })
}

/// One line of the per-snapshot JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotReport {
    pub timestamp: String,
    pub model: SummaryModel,
    pub avg_size: f64,
    pub avg_edges: f64,
    pub jaccard_prev: Option<f64>,
    pub js_prev: Option<f64>,
    pub added: usize,
    pub deleted: usize,
    pub recurring: usize,
    pub cumulative_seen: usize,
}

/// Build the report series for a sequence of summaries.
pub fn snapshot_reports(seq: &[(&SummaryGraph, &ExtensionMap)], norm: JsNormalization) -> Result<Vec<SnapshotReport>> {
    if seq.is_empty() {
        return Err(Error::Invalid("no summaries".into()));
    }
    for w in seq.windows(2) {
        check_models(w[0].0.model, w[1].0.model)?;
    }
    let track = meta_track(seq.iter().map(|(s, _)| *s))?;
    let mut out = Vec::with_capacity(seq.len());
    for (t, &(s, ext)) in seq.iter().enumerate() {
        let stats = unary_stats(s, ext)?;
        let m = &track.entries[t];
        let (jac, js) = if t == 0 {
            (None, None)
        } else {
            let d = diff(seq[t - 1], (s, ext), norm)?;
            (Some(d.jaccard), Some(d.js_divergence))
        };
        out.push(SnapshotReport {
            timestamp: s.timestamp.clone(),
            model: s.model,
            avg_size: stats.avg_size,
            avg_edges: stats.avg_edges,
            jaccard_prev: jac,
            js_prev: js,
            added: m.added_vs_prev,
            deleted: m.deleted_vs_prev,
            recurring: m.recurring_vs_prev,
            cumulative_seen: m.cumulative_seen,
        });
    }
    Ok(out)
}

/// Histogram as `value,count` CSV.
pub fn histogram_csv(h: &Histogram) -> String {
    let mut s = String::from("value,count\n");
    for (v, c) in h {
        s.push_str(&format!("{v},{c}\n"));
    }
    s
}
