//! Translation between a fragment of SHACL and triplestore schemas.
//!
//! Supported shapes:
//!
//! - `sh:targetObjectsOf p` or `sh:targetSubjectsOf p` with `sh:in`,
//!   `sh:hasValue`, `sh:nodeKind sh:IRI` or `sh:IRIOrLiteral`, or an
//!   `sh:or` of those. An `sh:or` member may also link through `sh:node` to
//!   a shape with one property on `p` (or its inverse) that constrains the
//!   nodes at the other end.
//! - `sh:targetNode n ; sh:path p` with the same value constraints.
//! - `sh:targetClass`, `sh:targetSubjectsOf` or `sh:targetObjectsOf` with
//!   `sh:property [ sh:path p ; sh:minCount 1 ]` (`sh:hasValue` instead of
//!   the count, and `[ sh:inversePath p ]` as path, are accepted) or
//!   `sh:class`. These become existential rules.
//! - An empty `sh:or ()` or `sh:not [ sh:nodeKind ... ]`, which make a
//!   predicate uninstantiable.
//! - A shape with `sh:closed true` listing the vocabulary as bare
//!   `sh:property [ sh:path p ]` entries.
//!
//! The vocabulary is closed: the predicates a document mentions anywhere
//! are the only ones its instances may use. Anything else is rejected with
//! [`Error::UnsupportedShacl`](crate::Error::UnsupportedShacl).

mod reader;
mod validate;
mod view;
mod writer;

use std::collections::BTreeSet;
use std::sync::Arc;

pub use reader::{shacl_to_schema, translate_shapes, ShapeTranslation};
pub use validate::{conforms, validate_shapes, ShaclViolation};
pub use writer::schema_to_shacl;

use crate::rdf::Term;
use crate::schema::ShapePart;

/// `e ≪ e2`: every term `e` admits is admitted by `e2`. Holds when the two
/// are equal (variables count as equal when they agree on literals), when
/// `e2` is a variable that allows literals, or when `e` is an IRI and `e2`
/// a variable.
pub fn subsumes(e: &ShapePart, e2: &ShapePart) -> bool {
    e == e2
        || matches!(e2, ShapePart::Var { no_literal: false })
        || (matches!(e, ShapePart::Const(c) if c.is_iri()) && matches!(e2, ShapePart::Var { .. }))
}

/// [`subsumes`] on schema terms, with `delta` as the no-literal set.
pub fn subsumes_terms(e: &Term, e2: &Term, delta: &BTreeSet<Arc<str>>) -> bool {
    let part = |t: &Term| match t {
        Term::Variable(v) => ShapePart::Var {
            no_literal: delta.contains(v),
        },
        c => ShapePart::Const(c.clone()),
    };
    subsumes(&part(e), &part(e2))
}
