use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::reader::{mentioned_predicates, read_path, target_of, top_level_shapes, Target};
use super::view::*;
use crate::error::{Error, Result};
use crate::rdf::{Graph, Term, RDF_TYPE};

const MAX_DEPTH: usize = 32;

/// A focus node that does not conform to a shape, or a triple outside the
/// vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ShaclViolation {
    pub shape: Term,
    pub focus: Term,
    pub message: String,
}

impl fmt::Display for ShaclViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.shape, self.focus, self.message)
    }
}

struct Data<'d> {
    graph: &'d Graph,
    forward: BTreeMap<(&'d Term, &'d Term), Vec<&'d Term>>,
    backward: BTreeMap<(&'d Term, &'d Term), Vec<&'d Term>>,
}

impl<'d> Data<'d> {
    fn new(graph: &'d Graph) -> Self {
        let mut forward: BTreeMap<_, Vec<_>> = BTreeMap::new();
        let mut backward: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for t in graph.iter() {
            forward.entry((t.s(), t.p())).or_default().push(t.o());
            backward.entry((t.o(), t.p())).or_default().push(t.s());
        }
        Data {
            graph,
            forward,
            backward,
        }
    }

    fn values(&self, focus: &Term, p: &Term, inverse: bool) -> Vec<&'d Term> {
        let index = if inverse {
            &self.backward
        } else {
            &self.forward
        };
        index.get(&(focus, p)).cloned().unwrap_or_default()
    }
}

struct Validator<'a, 'g, 'd> {
    view: &'a ShapesGraph<'g>,
    data: &'a Data<'d>,
}

impl Validator<'_, '_, '_> {
    /// Whether `focus` conforms to `shape`, following SHACL core semantics
    /// for the supported terms.
    fn conforms(&self, shape: &Term, focus: &Term, depth: usize) -> Result<bool> {
        if depth > MAX_DEPTH {
            return Err(Error::unsupported(shape, "recursive shapes"));
        }
        let v = self.view;
        if let Some((inverse, p)) = read_path(v, shape, shape)? {
            let values = self.data.values(focus, &p, inverse);
            if let Some(m) = v.one(shape, shape, MIN_COUNT)? {
                let min: usize = m
                    .lexical()
                    .parse()
                    .map_err(|_| Error::unsupported(shape, format!("sh:minCount {m}")))?;
                if values.len() < min {
                    return Ok(false);
                }
            }
            for h in v.objects(shape, HAS_VALUE) {
                if !values.contains(&h) {
                    return Ok(false);
                }
            }
            for value in values {
                if !self.node_ok(shape, value, depth)? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        if let Some(m) = v.one(shape, shape, MIN_COUNT)? {
            return Err(Error::unsupported(
                shape,
                format!("sh:minCount {m} without sh:path"),
            ));
        }
        for h in v.objects(shape, HAS_VALUE) {
            if h != focus {
                return Ok(false);
            }
        }
        self.node_ok(shape, focus, depth)
    }

    /// Constraints that apply to each value node.
    fn node_ok(&self, shape: &Term, node: &Term, depth: usize) -> Result<bool> {
        let v = self.view;
        for kind in v.objects(shape, NODE_KIND) {
            let ok = match kind.lexical() {
                IRI => node.is_iri(),
                IRI_OR_LITERAL => true,
                other => return Err(Error::unsupported(shape, format!("sh:nodeKind {other}"))),
            };
            if !ok {
                return Ok(false);
            }
        }
        for head in v.objects(shape, IN) {
            if !v.list(shape, head)?.contains(&node) {
                return Ok(false);
            }
        }
        for c in v.objects(shape, CLASS) {
            let types = self.data.values(node, &iri(RDF_TYPE), false);
            if !types.contains(&c) {
                return Ok(false);
            }
        }
        for head in v.objects(shape, OR) {
            let mut any = false;
            for member in v.list(shape, head)? {
                if self.conforms(member, node, depth + 1)? {
                    any = true;
                    break;
                }
            }
            if !any {
                return Ok(false);
            }
        }
        for inner in v.objects(shape, NOT) {
            if self.conforms(inner, node, depth + 1)? {
                return Ok(false);
            }
        }
        for target in v.objects(shape, NODE) {
            if !self.conforms(target, node, depth + 1)? {
                return Ok(false);
            }
        }
        for prop in v.objects(shape, PROPERTY) {
            if !self.conforms(prop, node, depth + 1)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn focus_nodes(&self, target: &Target) -> BTreeSet<Term> {
        let g = self.data.graph;
        match target {
            Target::Node(n) => BTreeSet::from([n.clone()]),
            Target::Class(c) => g
                .iter()
                .filter(|t| t.p().lexical() == RDF_TYPE && t.o() == c)
                .map(|t| t.s().clone())
                .collect(),
            Target::SubjectsOf(p) => g
                .iter()
                .filter(|t| t.p() == p)
                .map(|t| t.s().clone())
                .collect(),
            Target::ObjectsOf(p) => g
                .iter()
                .filter(|t| t.p() == p)
                .map(|t| t.o().clone())
                .collect(),
        }
    }
}

/// Checks `data` against `shapes` directly, without going through a
/// schema. Triples whose predicate the shapes never mention are reported
/// against the closed vocabulary.
pub fn validate_shapes(data: &Graph, shapes: &Graph) -> Result<Vec<ShaclViolation>> {
    let view = ShapesGraph::new(shapes);
    let index = Data::new(data);
    let validator = Validator {
        view: &view,
        data: &index,
    };
    let mut out = Vec::new();
    let vocabulary = mentioned_predicates(&view);
    let closed_shape = top_level_shapes(&view)
        .into_iter()
        .find(|s| {
            view.objects(s, CLOSED)
                .iter()
                .any(|o| o.lexical() == "true")
        })
        .cloned()
        .unwrap_or_else(|| iri("sh:closed"));
    for t in data.iter() {
        if !vocabulary.contains(t.p()) {
            out.push(ShaclViolation {
                shape: closed_shape.clone(),
                focus: t.s().clone(),
                message: format!("predicate {} is outside the vocabulary", t.p()),
            });
        }
    }
    for shape in top_level_shapes(&view) {
        let Some(target) = target_of(&view, shape)? else {
            continue;
        };
        for focus in validator.focus_nodes(&target) {
            if !validator.conforms(shape, &focus, 0)? {
                out.push(ShaclViolation {
                    shape: shape.clone(),
                    focus,
                    message: "does not conform".into(),
                });
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn conforms(data: &Graph, shapes: &Graph) -> Result<bool> {
    Ok(validate_shapes(data, shapes)?.is_empty())
}
