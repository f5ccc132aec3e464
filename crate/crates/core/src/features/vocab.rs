use std::collections::HashMap;
use std::io::BufRead;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::summary::{EqcHash, SummaryGraph};

/// Append-only map from predicate IRI to input column.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredicateVocabulary {
    iris: Vec<String>,
    index: HashMap<String, u32>,
}

impl PredicateVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn width(&self) -> usize {
        self.iris.len()
    }

    pub fn index_of(&self, iri: &str) -> Option<u32> {
        self.index.get(iri).copied()
    }

    pub fn iri(&self, i: u32) -> &str {
        &self.iris[i as usize]
    }

    pub fn iris(&self) -> &[String] {
        &self.iris
    }

    /// Append unseen IRIs in lexical order. Returns how many were added.
    pub fn extend<'a>(&mut self, iris: impl IntoIterator<Item = &'a str>) -> usize {
        let mut fresh: Vec<&str> = iris.into_iter().filter(|i| !self.index.contains_key(*i)).collect();
        fresh.sort_unstable();
        fresh.dedup();
        for iri in &fresh {
            self.index.insert(iri.to_string(), self.iris.len() as u32);
            self.iris.push(iri.to_string());
        }
        fresh.len()
    }

    pub fn is_prefix_of(&self, later: &PredicateVocabulary) -> bool {
        later.iris.starts_with(&self.iris)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for iri in &self.iris {
            out.push_str(iri);
            out.push('\n');
        }
        out
    }

    pub fn read(r: impl BufRead) -> Result<Self> {
        let mut v = Self::new();
        for line in r.lines() {
            let line = line.map_err(|e| Error::Invalid(format!("predicate vocabulary: {e}")))?;
            if line.is_empty() {
                continue;
            }
            if v.index.contains_key(&line) {
                return Err(Error::Invalid(format!("predicate vocabulary repeats {line}")));
            }
            v.index.insert(line.clone(), v.iris.len() as u32);
            v.iris.push(line);
        }
        Ok(v)
    }

    /// SHA-256 of the text form, hex encoded.
    pub fn digest(&self) -> String {
        sha256_hex(self.to_text().as_bytes())
    }
}

/// Append-only map from EQC to output class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassVocabulary {
    classes: Vec<EqcHash>,
    index: HashMap<EqcHash, u32>,
}

impl ClassVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn width(&self) -> usize {
        self.classes.len()
    }

    pub fn index_of(&self, q: EqcHash) -> Option<u32> {
        self.index.get(&q).copied()
    }

    pub fn class(&self, i: u32) -> EqcHash {
        self.classes[i as usize]
    }

    pub fn classes(&self) -> &[EqcHash] {
        &self.classes
    }

    /// Append unseen classes in ascending hash order. Returns how many were added.
    pub fn extend(&mut self, classes: impl IntoIterator<Item = EqcHash>) -> usize {
        let mut fresh: Vec<EqcHash> = classes.into_iter().filter(|q| !self.index.contains_key(q)).collect();
        fresh.sort_unstable();
        fresh.dedup();
        for &q in &fresh {
            self.index.insert(q, self.classes.len() as u32);
            self.classes.push(q);
        }
        fresh.len()
    }

    pub fn is_prefix_of(&self, later: &ClassVocabulary) -> bool {
        later.classes.starts_with(&self.classes)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.classes.len() * 17);
        for q in &self.classes {
            out.push_str(&q.to_hex());
            out.push('\n');
        }
        out
    }

    pub fn read(r: impl BufRead) -> Result<Self> {
        let mut v = Self::new();
        for line in r.lines() {
            let line = line.map_err(|e| Error::Invalid(format!("class vocabulary: {e}")))?;
            if line.is_empty() {
                continue;
            }
            let q = EqcHash::from_hex(&line)
                .ok_or_else(|| Error::Invalid(format!("class vocabulary: bad hash {line:?}")))?;
            if v.index.insert(q, v.classes.len() as u32).is_some() {
                return Err(Error::Invalid(format!("class vocabulary repeats {line}")));
            }
            v.classes.push(q);
        }
        Ok(v)
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.to_text().as_bytes())
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Grow both vocabularies with the predicates and EQCs of `summary`.
/// Returns the number of predicates and classes appended.
pub fn extend_vocabularies(
    summary: &SummaryGraph,
    predicates: &mut PredicateVocabulary,
    classes: &mut ClassVocabulary,
) -> (usize, usize) {
    let p = predicates.extend(summary.predicates.iter().map(String::as_str));
    let c = classes.extend(summary.eqcs.iter().copied());
    (p, c)
}
