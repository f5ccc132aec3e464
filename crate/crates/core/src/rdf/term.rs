use std::collections::HashMap;
use std::fmt;

/// Dense identifier of an interned term, valid within one [`TermTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermId(pub u32);

impl TermId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Iri,
    Blank,
    Literal,
}

/// Append-only interner for the terms of one snapshot.
///
/// The lexical form of an IRI is the text between the angle brackets, a blank
/// node is stored as `_:label`, and a literal keeps its quoted form including
/// any `@lang` or `^^<datatype>` suffix.
#[derive(Debug, Default, Clone)]
pub struct TermTable {
    terms: Vec<(TermKind, Box<str>)>,
    index: [HashMap<Box<str>, TermId>; 3],
}

impl TermTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, kind: TermKind, lexical: &str) -> TermId {
        let map = &mut self.index[kind as usize];
        if let Some(&id) = map.get(lexical) {
            return id;
        }
        let id = TermId(u32::try_from(self.terms.len()).expect("term table overflow"));
        let text: Box<str> = lexical.into();
        self.terms.push((kind, text.clone()));
        map.insert(text, id);
        id
    }

    pub fn get(&self, kind: TermKind, lexical: &str) -> Option<TermId> {
        self.index[kind as usize].get(lexical).copied()
    }

    pub fn kind(&self, id: TermId) -> TermKind {
        self.terms[id.index()].0
    }

    pub fn lexical(&self, id: TermId) -> &str {
        &self.terms[id.index()].1
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, TermKind, &str)> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, (k, s))| (TermId(i as u32), *k, &**s))
    }
}
