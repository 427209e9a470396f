//! Terms, triples, graphs, graph patterns and mappings.

mod fresh;
mod graph;
mod mapping;
mod term;

pub use fresh::{fresh_term, FreshNames};
pub use graph::{is_valid_rdf_graph, vars_and_consts, Graph, GraphPattern};
pub use mapping::{apply_substitution, Mapping, Substitution};
pub use term::{is_valid_triple, Position, Term, TermKind, Triple, TriplePattern};

pub const RDF_TYPE: &str = "rdf:type";

/// Reads a term in the compact notation used throughout tests and fixtures:
/// `?name` is a variable, `"text"` a literal, anything else an IRI.
pub fn term(s: &str) -> Term {
    if let Some(v) = s.strip_prefix('?') {
        Term::var(v)
    } else if s.len() >= 2 && s.starts_with('"') && s.ends_with('"') {
        Term::literal(&s[1..s.len() - 1])
    } else if s == "a" {
        Term::iri(RDF_TYPE)
    } else {
        Term::iri(s)
    }
}

pub fn pattern(s: &str, p: &str, o: &str) -> TriplePattern {
    TriplePattern::new(term(s), term(p), term(o))
}

/// Panics if the triple is not ground and valid.
pub fn triple(s: &str, p: &str, o: &str) -> Triple {
    pattern(s, p, o)
        .to_triple()
        .unwrap_or_else(|| panic!("not a valid triple: {s} {p} {o}"))
}

#[cfg(test)]
pub(crate) fn parse_pattern_str(s: &str, p: &str, o: &str) -> TriplePattern {
    pattern(s, p, o)
}
