//! Line-oriented N-Triples / N-Quads statement parser.
//!
//! Every physical line is parsed independently. A line is either a statement,
//! a comment, blank, or malformed; nothing here ever aborts a file. The graph
//! label of a quad is validated and then dropped.

use std::fmt;

use super::term::{TermId, TermKind, TermTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: TermId,
    pub predicate: TermId,
    pub object: TermId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkipReason {
    Comment,
    Blank,
    Malformed(&'static str),
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::Comment => f.write_str("comment"),
            SkipReason::Blank => f.write_str("blank"),
            SkipReason::Malformed(why) => write!(f, "malformed: {why}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineOutcome {
    Triple(Triple),
    Skip(SkipReason),
}

/// A term borrowed from the input line, not yet interned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawTerm<'a> {
    pub kind: TermKind,
    /// IRI without brackets, blank label without `_:`, or the full literal.
    pub text: &'a str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawStatement<'a> {
    pub subject: RawTerm<'a>,
    pub predicate: RawTerm<'a>,
    pub object: RawTerm<'a>,
}

/// Parse one line and intern its terms into `table`.
///
/// Blank node labels are interned as `_:label`. Terms are interned only once
/// the whole line has been accepted.
pub fn parse_line(line: &str, table: &mut TermTable) -> LineOutcome {
    match parse_statement(line) {
        Ok(st) => LineOutcome::Triple(Triple {
            subject: intern(table, st.subject, None),
            predicate: intern(table, st.predicate, None),
            object: intern(table, st.object, None),
        }),
        Err(reason) => LineOutcome::Skip(reason),
    }
}

pub(crate) fn intern(table: &mut TermTable, term: RawTerm<'_>, blank_scope: Option<&str>) -> TermId {
    match term.kind {
        TermKind::Blank => {
            let label = match blank_scope {
                Some(scope) => format!("_:{scope}.{}", term.text),
                None => format!("_:{}", term.text),
            };
            table.intern(TermKind::Blank, &label)
        }
        kind => table.intern(kind, term.text),
    }
}

pub fn parse_statement(line: &str) -> Result<RawStatement<'_>, SkipReason> {
    let trimmed = line.trim_matches(|c: char| c == ' ' || c == '\t' || c == '\r' || c == '\n');
    if trimmed.is_empty() {
        return Err(SkipReason::Blank);
    }
    if trimmed.starts_with('#') {
        return Err(SkipReason::Comment);
    }

    let mut cur = Cursor { s: trimmed, pos: 0 };
    let subject = match cur.peek() {
        Some(b'<') => cur.iri()?,
        Some(b'_') => cur.blank()?,
        _ => return Err(SkipReason::Malformed("subject must be an IRI or blank node")),
    };
    cur.require_ws()?;
    let predicate = match cur.peek() {
        Some(b'<') => cur.iri()?,
        _ => return Err(SkipReason::Malformed("predicate must be an IRI")),
    };
    cur.require_ws()?;
    let object = match cur.peek() {
        Some(b'<') => cur.iri()?,
        Some(b'_') => cur.blank()?,
        Some(b'"') => cur.literal()?,
        _ => return Err(SkipReason::Malformed("missing or invalid object")),
    };
    cur.skip_ws();
    // Optional graph label of a quad.
    match cur.peek() {
        Some(b'<') => {
            cur.iri()?;
            cur.skip_ws();
        }
        Some(b'_') => {
            cur.blank()?;
            cur.skip_ws();
        }
        _ => {}
    }
    if cur.peek() != Some(b'.') {
        return Err(SkipReason::Malformed("missing terminating '.'"));
    }
    cur.pos += 1;
    cur.skip_ws();
    match cur.peek() {
        None | Some(b'#') => Ok(RawStatement {
            subject,
            predicate,
            object,
        }),
        _ => Err(SkipReason::Malformed("trailing content after '.'")),
    }
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
    }

    fn require_ws(&mut self) -> Result<(), SkipReason> {
        let start = self.pos;
        self.skip_ws();
        // `<a><b><c> .` is legal N-Triples; only require a boundary after
        // tokens that could otherwise run together.
        if self.pos == start && !matches!(self.peek(), Some(b'<' | b'"')) {
            return Err(SkipReason::Malformed("expected whitespace between terms"));
        }
        Ok(())
    }

    fn iri(&mut self) -> Result<RawTerm<'a>, SkipReason> {
        debug_assert_eq!(self.peek(), Some(b'<'));
        let start = self.pos + 1;
        let bytes = self.s.as_bytes();
        let mut i = start;
        while i < bytes.len() {
            match bytes[i] {
                b'>' => {
                    if i == start {
                        return Err(SkipReason::Malformed("empty IRI"));
                    }
                    self.pos = i + 1;
                    return Ok(RawTerm {
                        kind: TermKind::Iri,
                        text: &self.s[start..i],
                    });
                }
                b' ' | b'\t' | b'<' | b'"' | b'{' | b'}' | b'|' | b'^' | b'`' => {
                    return Err(SkipReason::Malformed("illegal character in IRI"));
                }
                b'\\' => {
                    let len = match bytes.get(i + 1) {
                        Some(b'u') => 4,
                        Some(b'U') => 8,
                        _ => return Err(SkipReason::Malformed("bad escape in IRI")),
                    };
                    check_hex(bytes, i + 2, len)?;
                    i += 2 + len;
                }
                _ => i += 1,
            }
        }
        Err(SkipReason::Malformed("unterminated IRI"))
    }

    fn blank(&mut self) -> Result<RawTerm<'a>, SkipReason> {
        let bytes = self.s.as_bytes();
        if bytes.get(self.pos + 1) != Some(&b':') {
            return Err(SkipReason::Malformed("blank node must start with '_:'"));
        }
        let start = self.pos + 2;
        let mut end = start;
        while end < bytes.len() {
            let b = bytes[end];
            if b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.' | b':') || b >= 0x80 {
                end += 1;
            } else {
                break;
            }
        }
        // A label may not end with '.', which then belongs to the statement.
        while end > start && bytes[end - 1] == b'.' {
            end -= 1;
        }
        if end == start {
            return Err(SkipReason::Malformed("empty blank node label"));
        }
        self.pos = end;
        Ok(RawTerm {
            kind: TermKind::Blank,
            text: &self.s[start..end],
        })
    }

    fn literal(&mut self) -> Result<RawTerm<'a>, SkipReason> {
        let bytes = self.s.as_bytes();
        let start = self.pos;
        let mut i = start + 1;
        loop {
            match bytes.get(i) {
                None => return Err(SkipReason::Malformed("unterminated literal")),
                Some(b'"') => {
                    i += 1;
                    break;
                }
                Some(b'\\') => {
                    let len = match bytes.get(i + 1) {
                        Some(b't' | b'b' | b'n' | b'r' | b'f' | b'"' | b'\'' | b'\\') => 0,
                        Some(b'u') => 4,
                        Some(b'U') => 8,
                        _ => return Err(SkipReason::Malformed("bad escape in literal")),
                    };
                    check_hex(bytes, i + 2, len)?;
                    i += 2 + len;
                }
                Some(b'\n' | b'\r') => return Err(SkipReason::Malformed("raw newline in literal")),
                Some(_) => i += 1,
            }
        }
        self.pos = i;
        match self.peek() {
            Some(b'@') => {
                let tag_start = self.pos + 1;
                let mut j = tag_start;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'-') {
                    j += 1;
                }
                let tag = &self.s[tag_start..j];
                let valid = !tag.is_empty()
                    && tag.split('-').all(|part| !part.is_empty())
                    && tag.split('-').next().unwrap().bytes().all(|b| b.is_ascii_alphabetic());
                if !valid {
                    return Err(SkipReason::Malformed("invalid language tag"));
                }
                self.pos = j;
            }
            Some(b'^') => {
                if bytes.get(self.pos + 1) != Some(&b'^') || bytes.get(self.pos + 2) != Some(&b'<') {
                    return Err(SkipReason::Malformed("datatype must be '^^<iri>'"));
                }
                self.pos += 2;
                self.iri()?;
            }
            _ => {}
        }
        Ok(RawTerm {
            kind: TermKind::Literal,
            text: &self.s[start..self.pos],
        })
    }
}

fn check_hex(bytes: &[u8], from: usize, len: usize) -> Result<(), SkipReason> {
    if from + len > bytes.len() || !bytes[from..from + len].iter().all(u8::is_ascii_hexdigit) {
        return Err(SkipReason::Malformed("bad unicode escape"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(line: &str) -> (LineOutcome, TermTable) {
        let mut t = TermTable::new();
        let out = parse_line(line, &mut t);
        (out, t)
    }

    #[test]
    fn plain_triple() {
        let (out, t) = parse("<http://a> <http://p> <http://b> .");
        let LineOutcome::Triple(tr) = out else {
            panic!("{out:?}")
        };
        assert_eq!(t.lexical(tr.subject), "http://a");
        assert_eq!(t.lexical(tr.predicate), "http://p");
        assert_eq!(t.lexical(tr.object), "http://b");
    }

    #[test]
    fn comment_and_blank() {
        assert_eq!(parse("# comment").0, LineOutcome::Skip(SkipReason::Comment));
        assert_eq!(parse("   \t").0, LineOutcome::Skip(SkipReason::Blank));
        assert_eq!(parse("").0, LineOutcome::Skip(SkipReason::Blank));
    }

    #[test]
    fn typed_literal() {
        let (out, t) = parse(r#"<http://a> <http://p> "5"^^<http://www.w3.org/2001/XMLSchema#integer> ."#);
        let LineOutcome::Triple(tr) = out else {
            panic!("{out:?}")
        };
        assert_eq!(t.kind(tr.object), TermKind::Literal);
        assert_eq!(
            t.lexical(tr.object),
            r#""5"^^<http://www.w3.org/2001/XMLSchema#integer>"#
        );
    }

    #[test]
    fn missing_object_is_malformed() {
        assert!(matches!(
            parse("<http://a> <http://p> .").0,
            LineOutcome::Skip(SkipReason::Malformed(_))
        ));
    }

    #[test]
    fn quads_drop_the_graph_label() {
        let st = parse_statement("<http://a> <http://p> _:o <http://g> .").unwrap();
        assert_eq!(st.object.kind, TermKind::Blank);
        assert_eq!(st.object.text, "o");
        let st = parse_statement("_:s <http://p> \"x\"@en-GB _:g .").unwrap();
        assert_eq!(st.object.text, "\"x\"@en-GB");
    }

    #[test]
    fn blank_label_followed_by_dot() {
        let st = parse_statement("_:b1 <http://p> _:b2.").unwrap();
        assert_eq!(st.object.text, "b2");
    }

    #[test]
    fn escapes_and_trailing_comment() {
        let st = parse_statement(r#"<http://a> <http://p> "a \"q\" é" . # note"#).unwrap();
        assert_eq!(st.object.text, r#""a \"q\" é""#);
        assert!(parse_statement(r#"<http://a> <http://p> "bad \x" ."#).is_err());
        assert!(parse_statement(r#"<http://a> <http://p> "x"@ ."#).is_err());
        assert!(parse_statement("<http://a> <http://p> <http://b> . extra").is_err());
        assert!(parse_statement("<http://a b> <http://p> <http://b> .").is_err());
        assert!(parse_statement("\"lit\" <http://p> <http://b> .").is_err());
        assert!(parse_statement("<http://a> _:p <http://b> .").is_err());
    }

    #[test]
    fn malformed_lines_do_not_intern() {
        let mut t = TermTable::new();
        parse_line("<http://a> <http://p> \"open .", &mut t);
        assert!(t.is_empty());
    }
}
