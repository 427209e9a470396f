use std::collections::btree_set;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::term::{is_valid_triple, Term, Triple, TriplePattern};

/// A finite set of ground triples.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Graph {
    triples: BTreeSet<Triple>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn insert(&mut self, t: Triple) -> bool {
        self.triples.insert(t)
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> btree_set::Iter<'_, Triple> {
        self.triples.iter()
    }

    pub fn is_subset(&self, other: &Graph) -> bool {
        self.triples.is_subset(&other.triples)
    }

    pub fn union(&self, other: &Graph) -> Graph {
        self.triples.union(&other.triples).cloned().collect()
    }

    pub fn difference(&self, other: &Graph) -> Graph {
        self.triples.difference(&other.triples).cloned().collect()
    }

    pub fn constants(&self) -> BTreeSet<Term> {
        self.iter()
            .flat_map(|t| t.terms().map(Clone::clone))
            .collect()
    }

    pub fn to_pattern(&self) -> GraphPattern {
        self.iter().map(Triple::to_pattern).collect()
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
        }
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter)
    }
}

impl IntoIterator for Graph {
    type Item = Triple;
    type IntoIter = btree_set::IntoIter<Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.into_iter()
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self {
            writeln!(f, "{t} .")?;
        }
        Ok(())
    }
}

/// A finite set of triple patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphPattern {
    patterns: BTreeSet<TriplePattern>,
}

impl GraphPattern {
    pub fn new() -> Self {
        GraphPattern::default()
    }

    pub fn insert(&mut self, t: TriplePattern) -> bool {
        self.patterns.insert(t)
    }

    pub fn remove(&mut self, t: &TriplePattern) -> bool {
        self.patterns.remove(t)
    }

    pub fn contains(&self, t: &TriplePattern) -> bool {
        self.patterns.contains(t)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn iter(&self) -> btree_set::Iter<'_, TriplePattern> {
        self.patterns.iter()
    }

    pub fn is_well_formed(&self) -> bool {
        self.iter().all(TriplePattern::is_well_formed)
    }

    pub fn vars(&self) -> BTreeSet<Arc<str>> {
        self.iter().flat_map(|t| t.vars().cloned()).collect()
    }

    pub fn constants(&self) -> BTreeSet<Term> {
        self.iter()
            .flat_map(|t| t.terms())
            .filter(|t| t.is_constant())
            .cloned()
            .collect()
    }

    /// The ground graph this pattern denotes, if every pattern is a valid triple.
    pub fn to_graph(&self) -> Option<Graph> {
        self.iter().map(TriplePattern::to_triple).collect()
    }
}

impl FromIterator<TriplePattern> for GraphPattern {
    fn from_iter<I: IntoIterator<Item = TriplePattern>>(iter: I) -> Self {
        GraphPattern {
            patterns: iter.into_iter().collect(),
        }
    }
}

impl Extend<TriplePattern> for GraphPattern {
    fn extend<I: IntoIterator<Item = TriplePattern>>(&mut self, iter: I) {
        self.patterns.extend(iter)
    }
}

impl IntoIterator for GraphPattern {
    type Item = TriplePattern;
    type IntoIter = btree_set::IntoIter<TriplePattern>;

    fn into_iter(self) -> Self::IntoIter {
        self.patterns.into_iter()
    }
}

impl<'a> IntoIterator for &'a GraphPattern {
    type Item = &'a TriplePattern;
    type IntoIter = btree_set::Iter<'a, TriplePattern>;

    fn into_iter(self) -> Self::IntoIter {
        self.patterns.iter()
    }
}

impl fmt::Display for GraphPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self {
            writeln!(f, "{t} .")?;
        }
        Ok(())
    }
}

/// True iff every triple is ground and a valid RDF triple.
pub fn is_valid_rdf_graph<'a>(triples: impl IntoIterator<Item = &'a TriplePattern>) -> bool {
    triples
        .into_iter()
        .all(|t| is_valid_triple(&t.s, &t.p, &t.o))
}

/// The variables and the constants (IRIs and literals) occurring in `p`.
pub fn vars_and_consts(p: &GraphPattern) -> (BTreeSet<Arc<str>>, BTreeSet<Term>) {
    (p.vars(), p.constants())
}
