use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// The three kinds of RDF terms this crate deals with. Blank nodes are
/// represented as IRIs (`_:label`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Iri,
    Literal,
    Variable,
}

/// An IRI, a literal or a variable.
///
/// IRIs keep the lexical form they were written in: either a prefixed name
/// (`sn:hasResult`, `:a`, `_:b0`) or an absolute IRI (`http://example.org/a`).
/// Literals are compared by lexical form only. Variables are stored without
/// the `?` sigil.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Arc<str>),
    Literal(Arc<str>),
    Variable(Arc<str>),
}

impl Term {
    pub fn iri(lexical: impl AsRef<str>) -> Term {
        Term::Iri(Arc::from(lexical.as_ref()))
    }

    pub fn literal(lexical: impl AsRef<str>) -> Term {
        Term::Literal(Arc::from(lexical.as_ref()))
    }

    pub fn var(name: impl AsRef<str>) -> Term {
        let name = name.as_ref();
        Term::Variable(Arc::from(name.strip_prefix('?').unwrap_or(name)))
    }

    /// Checked constructor; rejects empty lexical forms.
    pub fn new(kind: TermKind, lexical: impl AsRef<str>) -> Result<Term> {
        let lexical = lexical.as_ref();
        if lexical.is_empty() && kind != TermKind::Literal {
            return Err(Error::InvalidTerm(format!("empty {kind:?} name")));
        }
        Ok(match kind {
            TermKind::Iri => Term::iri(lexical),
            TermKind::Literal => Term::literal(lexical),
            TermKind::Variable => Term::var(lexical),
        })
    }

    pub fn kind(&self) -> TermKind {
        match self {
            Term::Iri(_) => TermKind::Iri,
            Term::Literal(_) => TermKind::Literal,
            Term::Variable(_) => TermKind::Variable,
        }
    }

    pub fn lexical(&self) -> &str {
        match self {
            Term::Iri(s) | Term::Literal(s) | Term::Variable(s) => s,
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn is_constant(&self) -> bool {
        !self.is_var()
    }

    pub fn as_var(&self) -> Option<&Arc<str>> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }
}

fn is_prefixed_name(s: &str) -> bool {
    let Some((prefix, local)) = s.split_once(':') else {
        return false;
    };
    prefix
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && !prefix.starts_with('-')
        && local
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !local.ends_with('.')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(s) if is_prefixed_name(s) => f.write_str(s),
            Term::Iri(s) => write!(f, "<{s}>"),
            Term::Literal(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Term::Variable(s) => write!(f, "?{s}"),
        }
    }
}

/// Index of a position inside a triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    Subject,
    Predicate,
    Object,
}

impl Position {
    pub const ALL: [Position; 3] = [Position::Subject, Position::Predicate, Position::Object];
}

/// A triple of terms, possibly containing variables.
///
/// Construction is unchecked because substitutions can legitimately produce
/// ill-formed patterns; use [`TriplePattern::is_well_formed`] or
/// [`TriplePattern::checked`] where that matters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

impl TriplePattern {
    pub fn new(s: Term, p: Term, o: Term) -> Self {
        TriplePattern { s, p, o }
    }

    pub fn checked(s: Term, p: Term, o: Term) -> Result<Self> {
        let t = TriplePattern { s, p, o };
        if t.is_well_formed() {
            Ok(t)
        } else {
            Err(Error::InvalidPattern {
                pattern: t.to_string(),
                reason: "literals may only occur in object position".into(),
            })
        }
    }

    /// `(IRI ∪ Var) × (IRI ∪ Var) × (IRI ∪ Literal ∪ Var)`.
    pub fn is_well_formed(&self) -> bool {
        !self.s.is_literal() && !self.p.is_literal()
    }

    pub fn get(&self, pos: Position) -> &Term {
        match pos {
            Position::Subject => &self.s,
            Position::Predicate => &self.p,
            Position::Object => &self.o,
        }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.s, &self.p, &self.o]
    }

    pub fn positions(&self) -> impl Iterator<Item = (Position, &Term)> {
        Position::ALL.into_iter().zip(self.terms())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Arc<str>> {
        self.terms().into_iter().filter_map(Term::as_var)
    }

    pub fn is_ground(&self) -> bool {
        self.terms().iter().all(|t| t.is_constant())
    }

    /// The ground, valid triple this pattern denotes, if any.
    pub fn to_triple(&self) -> Option<Triple> {
        Triple::new(self.s.clone(), self.p.clone(), self.o.clone()).ok()
    }

    pub fn map_terms(&self, mut f: impl FnMut(Position, &Term) -> Term) -> TriplePattern {
        TriplePattern {
            s: f(Position::Subject, &self.s),
            p: f(Position::Predicate, &self.p),
            o: f(Position::Object, &self.o),
        }
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.s, self.p, self.o)
    }
}

/// A ground RDF triple: `IRI × IRI × (IRI ∪ Literal)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    s: Term,
    p: Term,
    o: Term,
}

impl Triple {
    pub fn new(s: Term, p: Term, o: Term) -> Result<Self> {
        if is_valid_triple(&s, &p, &o) {
            Ok(Triple { s, p, o })
        } else {
            Err(Error::InvalidPattern {
                pattern: TriplePattern::new(s, p, o).to_string(),
                reason: "not a valid RDF triple".into(),
            })
        }
    }

    pub fn s(&self) -> &Term {
        &self.s
    }

    pub fn p(&self) -> &Term {
        &self.p
    }

    pub fn o(&self) -> &Term {
        &self.o
    }

    pub fn get(&self, pos: Position) -> &Term {
        match pos {
            Position::Subject => &self.s,
            Position::Predicate => &self.p,
            Position::Object => &self.o,
        }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.s, &self.p, &self.o]
    }

    pub fn to_pattern(&self) -> TriplePattern {
        TriplePattern::new(self.s.clone(), self.p.clone(), self.o.clone())
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.s, self.p, self.o)
    }
}

pub fn is_valid_triple(s: &Term, p: &Term, o: &Term) -> bool {
    s.is_iri() && p.is_iri() && !o.is_var()
}
