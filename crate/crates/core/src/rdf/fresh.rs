use std::collections::HashSet;
use std::sync::Arc;

use super::graph::{Graph, GraphPattern};
use super::term::{Term, TermKind, TriplePattern};

/// Issues variable and IRI names that are distinct from every name observed
/// so far. The sequence only depends on the observed names and the call
/// order, so runs are reproducible.
#[derive(Debug, Clone)]
pub struct FreshNames {
    seen: HashSet<(TermKind, Arc<str>)>,
    var_prefix: String,
    iri_prefix: String,
    next_var: usize,
    next_iri: usize,
}

impl Default for FreshNames {
    fn default() -> Self {
        FreshNames::new()
    }
}

impl FreshNames {
    pub fn new() -> Self {
        FreshNames::with_prefixes("f", "urn:fresh:")
    }

    pub fn with_prefixes(var_prefix: &str, iri_prefix: &str) -> Self {
        FreshNames {
            seen: HashSet::new(),
            var_prefix: var_prefix.to_string(),
            iri_prefix: iri_prefix.to_string(),
            next_var: 0,
            next_iri: 0,
        }
    }

    pub fn observe(&mut self, t: &Term) {
        if !t.is_literal() {
            self.seen.insert((t.kind(), Arc::from(t.lexical())));
        }
    }

    pub fn observe_triple(&mut self, t: &TriplePattern) {
        for term in t.terms() {
            self.observe(term);
        }
    }

    pub fn observe_pattern(&mut self, p: &GraphPattern) {
        for t in p {
            self.observe_triple(t);
        }
    }

    pub fn observe_graph(&mut self, g: &Graph) {
        for t in g {
            for term in t.terms() {
                self.observe(term);
            }
        }
    }

    pub fn fresh(&mut self, kind: TermKind) -> Term {
        loop {
            let (name, term) = match kind {
                TermKind::Variable => {
                    self.next_var += 1;
                    let n = format!("{}{}", self.var_prefix, self.next_var);
                    let t = Term::var(&n);
                    (n, t)
                }
                TermKind::Iri => {
                    self.next_iri += 1;
                    let n = format!("{}{}", self.iri_prefix, self.next_iri);
                    let t = Term::iri(&n);
                    (n, t)
                }
                TermKind::Literal => panic!("fresh literals are not issued"),
            };
            if self.seen.insert((kind, Arc::from(name.as_str()))) {
                return term;
            }
        }
    }

    pub fn fresh_var(&mut self) -> Term {
        self.fresh(TermKind::Variable)
    }

    pub fn fresh_iri(&mut self) -> Term {
        self.fresh(TermKind::Iri)
    }
}

/// Convenience for [`FreshNames::fresh`].
pub fn fresh_term(kind: TermKind, registry: &mut FreshNames) -> Term {
    registry.fresh(kind)
}
