use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::rdf::{Graph, Term, Triple};

pub(crate) const NODE_SHAPE: &str = "sh:NodeShape";
pub(crate) const TARGET_CLASS: &str = "sh:targetClass";
pub(crate) const TARGET_NODE: &str = "sh:targetNode";
pub(crate) const TARGET_SUBJECTS_OF: &str = "sh:targetSubjectsOf";
pub(crate) const TARGET_OBJECTS_OF: &str = "sh:targetObjectsOf";
pub(crate) const NODE_KIND: &str = "sh:nodeKind";
pub(crate) const IRI: &str = "sh:IRI";
pub(crate) const IRI_OR_LITERAL: &str = "sh:IRIOrLiteral";
pub(crate) const IN: &str = "sh:in";
pub(crate) const PROPERTY: &str = "sh:property";
pub(crate) const PATH: &str = "sh:path";
pub(crate) const INVERSE_PATH: &str = "sh:inversePath";
pub(crate) const MIN_COUNT: &str = "sh:minCount";
pub(crate) const CLASS: &str = "sh:class";
pub(crate) const HAS_VALUE: &str = "sh:hasValue";
pub(crate) const NODE: &str = "sh:node";
pub(crate) const OR: &str = "sh:or";
pub(crate) const NOT: &str = "sh:not";
pub(crate) const CLOSED: &str = "sh:closed";
pub(crate) const IGNORED_PROPERTIES: &str = "sh:ignoredProperties";

pub(crate) const RDF_FIRST: &str = "rdf:first";
pub(crate) const RDF_REST: &str = "rdf:rest";
pub(crate) const RDF_NIL: &str = "rdf:nil";

pub(crate) const SUPPORTED: [&str; 20] = [
    NODE_SHAPE,
    TARGET_CLASS,
    TARGET_NODE,
    TARGET_SUBJECTS_OF,
    TARGET_OBJECTS_OF,
    NODE_KIND,
    IRI,
    IRI_OR_LITERAL,
    IN,
    PROPERTY,
    PATH,
    INVERSE_PATH,
    MIN_COUNT,
    CLASS,
    HAS_VALUE,
    NODE,
    OR,
    NOT,
    CLOSED,
    IGNORED_PROPERTIES,
];

pub(crate) fn iri(s: &str) -> Term {
    Term::iri(s)
}

/// Subject-indexed access to a shapes graph.
pub(crate) struct ShapesGraph<'g> {
    by_subject: BTreeMap<&'g Term, Vec<&'g Triple>>,
    graph: &'g Graph,
}

impl<'g> ShapesGraph<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        let mut by_subject: BTreeMap<&Term, Vec<&Triple>> = BTreeMap::new();
        for t in graph.iter() {
            by_subject.entry(t.s()).or_default().push(t);
        }
        ShapesGraph { by_subject, graph }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn triples_of(&self, s: &Term) -> &[&'g Triple] {
        self.by_subject.get(s).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn predicates_of(&self, s: &Term) -> BTreeSet<&'g Term> {
        self.triples_of(s).iter().map(|t| t.p()).collect()
    }

    pub fn objects(&self, s: &Term, p: &str) -> Vec<&'g Term> {
        self.triples_of(s)
            .iter()
            .filter(|t| t.p().lexical() == p && t.p().is_iri())
            .map(|t| t.o())
            .collect()
    }

    pub fn has(&self, s: &Term, p: &str) -> bool {
        !self.objects(s, p).is_empty()
    }

    /// The single object of `p` on `s`, if any.
    pub fn one(&self, shape: &Term, s: &Term, p: &str) -> Result<Option<&'g Term>> {
        let os = self.objects(s, p);
        match os.len() {
            0 => Ok(None),
            1 => Ok(Some(os[0])),
            _ => Err(Error::unsupported(shape, format!("more than one {p}"))),
        }
    }

    /// Members of the RDF list starting at `head`.
    pub fn list(&self, shape: &Term, head: &Term) -> Result<Vec<&'g Term>> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut cur = head;
        while cur.lexical() != RDF_NIL {
            if !seen.insert(cur) {
                return Err(Error::unsupported(shape, "cyclic RDF list"));
            }
            let first = self.one(shape, cur, RDF_FIRST)?;
            let rest = self.one(shape, cur, RDF_REST)?;
            match (first, rest) {
                (Some(f), Some(r)) => {
                    out.push(f);
                    cur = r;
                }
                _ => return Err(Error::unsupported(shape, "malformed RDF list")),
            }
        }
        Ok(out)
    }

    pub fn subjects(&self) -> impl Iterator<Item = &'g Term> + '_ {
        self.by_subject.keys().copied()
    }
}

/// Appends the triples of an RDF list of `items` to `out` and returns its
/// head.
pub(crate) fn build_list(
    items: &[Term],
    mut fresh: impl FnMut() -> Term,
    out: &mut Vec<Triple>,
) -> Term {
    let mut head = iri(RDF_NIL);
    let cells: Vec<Term> = items.iter().map(|_| fresh()).collect();
    for (item, cell) in items.iter().zip(cells).rev() {
        out.push(
            Triple::new(cell.clone(), iri(RDF_FIRST), item.clone()).expect("list cells are IRIs"),
        );
        out.push(Triple::new(cell.clone(), iri(RDF_REST), head).expect("list cells are IRIs"));
        head = cell;
    }
    head
}
