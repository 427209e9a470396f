use std::collections::{BTreeMap, BTreeSet};

use super::view::*;
use crate::error::{Error, Result};
use crate::rdf::{Term, TriplePattern, RDF_TYPE};
use crate::schema::{
    normalize_schema, schema_from_shape_keys, ExistentialRule, ShapeKey, ShapePart,
    TriplestoreSchema,
};

/// Result of reading a shapes document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeTranslation {
    pub schema: TriplestoreSchema,
    /// Predicates whose allowed patterns were narrowed to nothing.
    pub uninstantiable: BTreeSet<Term>,
}

/// A set of RDF terms a node constraint admits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Class {
    Any,
    Iri,
    AnyLiteral,
    Const(Term),
}

impl Class {
    fn meet(&self, other: &Class) -> Option<Class> {
        use Class::*;
        match (self, other) {
            (Any, x) | (x, Any) => Some(x.clone()),
            (Iri, Iri) => Some(Iri),
            (AnyLiteral, AnyLiteral) => Some(AnyLiteral),
            (Iri, AnyLiteral) | (AnyLiteral, Iri) => None,
            (Iri, Const(c)) | (Const(c), Iri) => c.is_iri().then(|| Const(c.clone())),
            (AnyLiteral, Const(c)) | (Const(c), AnyLiteral) => {
                c.is_literal().then(|| Const(c.clone()))
            }
            (Const(a), Const(b)) => (a == b).then(|| Const(a.clone())),
        }
    }
}

fn meet_all(a: &[Class], b: &[Class]) -> Vec<Class> {
    let out: BTreeSet<Class> = a
        .iter()
        .flat_map(|x| b.iter().filter_map(|y| x.meet(y)))
        .collect();
    out.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

/// One alternative of a node constraint: the focus node is in `classes`
/// and, when linked, every node reached from it through the predicate is
/// in the linked classes.
#[derive(Debug, Clone)]
struct Disjunct {
    classes: Vec<Class>,
    link: Option<(Direction, Term, Vec<Class>)>,
}

fn subject_parts(classes: &[Class]) -> Vec<ShapePart> {
    let out: BTreeSet<ShapePart> = classes
        .iter()
        .filter_map(|c| match c {
            Class::Any | Class::Iri => Some(ShapePart::Var { no_literal: true }),
            Class::Const(t) if t.is_iri() => Some(ShapePart::Const(t.clone())),
            _ => None,
        })
        .collect();
    out.into_iter().collect()
}

fn object_parts(shape: &Term, classes: &[Class]) -> Result<Vec<ShapePart>> {
    let mut out = BTreeSet::new();
    for c in classes {
        out.insert(match c {
            Class::Any => ShapePart::Var { no_literal: false },
            Class::Iri => ShapePart::Var { no_literal: true },
            Class::Const(t) => ShapePart::Const(t.clone()),
            Class::AnyLiteral => {
                return Err(Error::unsupported(shape, "objects restricted to literals"))
            }
        });
    }
    Ok(out.into_iter().collect())
}

fn part_meet(a: &ShapePart, b: &ShapePart) -> Option<ShapePart> {
    use ShapePart::*;
    match (a, b) {
        (Var { no_literal: x }, Var { no_literal: y }) => Some(Var {
            no_literal: *x || *y,
        }),
        (Var { no_literal }, Const(c)) | (Const(c), Var { no_literal }) => {
            (!(c.is_literal() && *no_literal)).then(|| Const(c.clone()))
        }
        (Const(x), Const(y)) => (x == y).then(|| Const(x.clone())),
    }
}

/// Whether every term admitted by `a` is admitted by `b`.
pub(crate) fn part_within(a: &ShapePart, b: &ShapePart) -> bool {
    use ShapePart::*;
    match (a, b) {
        (_, Var { no_literal: false }) => true,
        (Var { no_literal: true }, Var { no_literal: true }) => true,
        (Const(c), Var { no_literal: true }) => c.is_iri(),
        (Const(x), Const(y)) => x == y,
        _ => false,
    }
}

type Pair = (ShapePart, ShapePart);

struct State {
    patterns: BTreeMap<Term, BTreeSet<Pair>>,
    uninstantiable: BTreeSet<Term>,
    existentials: BTreeSet<ExistentialRule>,
}

impl State {
    fn allow(&mut self, p: &Term) {
        self.patterns.entry(p.clone()).or_insert_with(|| {
            BTreeSet::from([(
                ShapePart::Var { no_literal: true },
                ShapePart::Var { no_literal: false },
            )])
        });
    }

    /// Replaces the patterns of `p` by their intersection with `t`.
    fn restrict(&mut self, p: &Term, t: &BTreeSet<Pair>) {
        let current = self.patterns.get(p).cloned().unwrap_or_default();
        let next: BTreeSet<Pair> = current
            .iter()
            .flat_map(|(s1, o1)| {
                t.iter()
                    .filter_map(move |(s2, o2)| Some((part_meet(s1, s2)?, part_meet(o1, o2)?)))
            })
            .collect();
        if next.is_empty() {
            self.uninstantiable.insert(p.clone());
        }
        self.patterns.insert(p.clone(), next);
    }
}

/// Predicates the document talks about: targets, paths, closed-shape
/// properties and `rdf:type` when classes are used.
pub(crate) fn mentioned_predicates(view: &ShapesGraph<'_>) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for t in view.graph().iter() {
        match t.p().lexical() {
            TARGET_SUBJECTS_OF | TARGET_OBJECTS_OF | INVERSE_PATH if t.o().is_iri() => {
                out.insert(t.o().clone());
            }
            PATH if t.o().is_iri() && !view.has(t.o(), INVERSE_PATH) => {
                out.insert(t.o().clone());
            }
            TARGET_CLASS | CLASS => {
                out.insert(iri(RDF_TYPE));
            }
            IGNORED_PROPERTIES => {
                if let Ok(items) = view.list(t.s(), t.o()) {
                    out.extend(items.into_iter().filter(|x| x.is_iri()).cloned());
                }
            }
            _ => {}
        }
    }
    out
}

fn check_vocabulary(view: &ShapesGraph<'_>) -> Result<()> {
    for t in view.graph().iter() {
        for x in [t.p(), t.o()] {
            if x.is_iri() && x.lexical().starts_with("sh:") && !SUPPORTED.contains(&x.lexical()) {
                return Err(Error::unsupported(t.s(), x.lexical()));
            }
        }
    }
    Ok(())
}

/// Every node that is declared a node shape or has a target.
pub(crate) fn top_level_shapes<'g>(view: &ShapesGraph<'g>) -> Vec<&'g Term> {
    view.subjects()
        .filter(|s| {
            view.objects(s, RDF_TYPE)
                .iter()
                .any(|o| o.lexical() == NODE_SHAPE)
                || [
                    TARGET_CLASS,
                    TARGET_NODE,
                    TARGET_SUBJECTS_OF,
                    TARGET_OBJECTS_OF,
                ]
                .iter()
                .any(|p| view.has(s, p))
        })
        .collect()
}

pub(crate) enum Target {
    Class(Term),
    Node(Term),
    SubjectsOf(Term),
    ObjectsOf(Term),
}

pub(crate) fn target_of(view: &ShapesGraph<'_>, shape: &Term) -> Result<Option<Target>> {
    let mut found = Vec::new();
    for (p, make) in [
        (TARGET_CLASS, Target::Class as fn(Term) -> Target),
        (TARGET_NODE, Target::Node),
        (TARGET_SUBJECTS_OF, Target::SubjectsOf),
        (TARGET_OBJECTS_OF, Target::ObjectsOf),
    ] {
        for o in view.objects(shape, p) {
            if !o.is_iri() && p != TARGET_NODE {
                return Err(Error::unsupported(shape, format!("{p} {o}")));
            }
            found.push(make(o.clone()));
        }
    }
    if found.len() > 1 {
        return Err(Error::unsupported(shape, "more than one target"));
    }
    Ok(found.pop())
}

fn is_true(t: &Term) -> bool {
    t.lexical() == "true"
}

/// A property shape's path: a predicate or `[ sh:inversePath p ]`.
pub(crate) fn read_path(
    view: &ShapesGraph<'_>,
    shape: &Term,
    node: &Term,
) -> Result<Option<(bool, Term)>> {
    let Some(path) = view.one(shape, node, PATH)? else {
        return Ok(None);
    };
    if let Some(inv) = view.one(shape, path, INVERSE_PATH)? {
        if !inv.is_iri() || view.triples_of(path).len() != 1 {
            return Err(Error::unsupported(shape, "complex property path"));
        }
        return Ok(Some((true, inv.clone())));
    }
    if !path.is_iri() || !view.triples_of(path).is_empty() {
        return Err(Error::unsupported(shape, "complex property path"));
    }
    Ok(Some((false, path.clone())))
}

struct Reader<'v, 'g> {
    view: &'v ShapesGraph<'g>,
}

impl Reader<'_, '_> {
    /// Classes admitted by the value constraints written directly on
    /// `node`, ignoring `sh:or` and `sh:node`. `None` when there are none.
    fn own_classes(&self, shape: &Term, node: &Term) -> Result<Option<Vec<Class>>> {
        let v = self.view;
        let mut classes = vec![Class::Any];
        let mut any = false;
        for kind in v.objects(node, NODE_KIND) {
            any = true;
            let c = match kind.lexical() {
                IRI => Class::Iri,
                IRI_OR_LITERAL => Class::Any,
                other => return Err(Error::unsupported(shape, format!("sh:nodeKind {other}"))),
            };
            classes = meet_all(&classes, &[c]);
        }
        for head in v.objects(node, IN) {
            any = true;
            let items: Vec<Class> = v
                .list(shape, head)?
                .into_iter()
                .map(|t| Class::Const(t.clone()))
                .collect();
            classes = meet_all(&classes, &items);
        }
        for value in v.objects(node, HAS_VALUE) {
            any = true;
            classes = meet_all(&classes, &[Class::Const(value.clone())]);
        }
        for inner in v.objects(node, NOT) {
            any = true;
            let preds = v.predicates_of(inner);
            let kind = v.one(shape, inner, NODE_KIND)?;
            if preds.len() != 1 || kind.is_none() {
                return Err(Error::unsupported(
                    shape,
                    "sh:not other than sh:not [ sh:nodeKind ... ]",
                ));
            }
            let complement = match kind.map(Term::lexical) {
                Some(IRI) => vec![Class::AnyLiteral],
                Some(IRI_OR_LITERAL) => vec![],
                _ => return Err(Error::unsupported(shape, "sh:not of this sh:nodeKind")),
            };
            classes = meet_all(&classes, &complement);
        }
        Ok(any.then_some(classes))
    }

    /// The constraint on a linked node reached through `sh:node`: a shape
    /// with one property whose path is `p` or its inverse.
    fn link(&self, shape: &Term, target: &Term, p: &Term) -> Result<(Direction, Term, Vec<Class>)> {
        let v = self.view;
        for q in v.predicates_of(target) {
            if ![RDF_TYPE, PROPERTY].contains(&q.lexical()) {
                return Err(Error::unsupported(shape, format!("{q} on a sh:node shape")));
            }
        }
        let props = v.objects(target, PROPERTY);
        if props.len() != 1 {
            return Err(Error::unsupported(
                shape,
                "sh:node shape without exactly one sh:property",
            ));
        }
        let prop = props[0];
        let (inverse, path) = read_path(v, shape, prop)?
            .ok_or_else(|| Error::unsupported(shape, "sh:property without sh:path"))?;
        if &path != p {
            return Err(Error::unsupported(
                shape,
                format!("sh:node path {path} differs from the target predicate {p}"),
            ));
        }
        for q in v.predicates_of(prop) {
            if ![PATH, OR, IN, NODE_KIND, HAS_VALUE].contains(&q.lexical()) {
                return Err(Error::unsupported(
                    shape,
                    format!("{q} in a linked property"),
                ));
            }
        }
        let disjuncts = self.constraint(shape, prop, None)?;
        let classes = match disjuncts {
            None => vec![Class::Any],
            Some(ds) => ds.into_iter().flat_map(|d| d.classes).collect(),
        };
        let dir = if inverse {
            Direction::Inverse
        } else {
            Direction::Forward
        };
        Ok((dir, path, classes))
    }

    /// The node constraint on `node` as a list of alternatives. `p` is the
    /// predicate `sh:node` links may follow; `None` forbids links.
    fn constraint(
        &self,
        shape: &Term,
        node: &Term,
        p: Option<&Term>,
    ) -> Result<Option<Vec<Disjunct>>> {
        let v = self.view;
        let own = self.own_classes(shape, node)?;
        let mut link = None;
        if let Some(target) = v.one(shape, node, NODE)? {
            let p = p.ok_or_else(|| Error::unsupported(shape, "nested sh:node"))?;
            link = Some(self.link(shape, target, p)?);
        }
        let ors = v.objects(node, OR);
        if ors.len() > 1 {
            return Err(Error::unsupported(shape, "more than one sh:or"));
        }
        if let Some(head) = ors.first() {
            if link.is_some() {
                return Err(Error::unsupported(shape, "sh:node next to sh:or"));
            }
            let base = own.unwrap_or_else(|| vec![Class::Any]);
            let mut out = Vec::new();
            for member in v.list(shape, head)? {
                for q in v.predicates_of(member) {
                    if ![RDF_TYPE, NODE_KIND, IN, HAS_VALUE, NOT, NODE].contains(&q.lexical()) {
                        return Err(Error::unsupported(shape, format!("{q} inside sh:or")));
                    }
                }
                let classes = self
                    .own_classes(shape, member)?
                    .unwrap_or_else(|| vec![Class::Any]);
                let link = match v.one(shape, member, NODE)? {
                    Some(target) => {
                        let p = p.ok_or_else(|| Error::unsupported(shape, "nested sh:node"))?;
                        Some(self.link(shape, target, p)?)
                    }
                    None => None,
                };
                out.push(Disjunct {
                    classes: meet_all(&base, &classes),
                    link,
                });
            }
            return Ok(Some(out));
        }
        if own.is_none() && link.is_none() {
            return Ok(None);
        }
        Ok(Some(vec![Disjunct {
            classes: own.unwrap_or_else(|| vec![Class::Any]),
            link,
        }]))
    }

    /// Existential rules from `sh:property` entries and `sh:class`, with the
    /// focus node bound to `?x` in `antecedent`.
    fn existentials(
        &self,
        shape: &Term,
        antecedent: &TriplePattern,
    ) -> Result<Vec<ExistentialRule>> {
        let v = self.view;
        let x = Term::var("x");
        let y = Term::var("y");
        let mut out = Vec::new();
        for prop in v.objects(shape, PROPERTY) {
            for q in v.predicates_of(prop) {
                if ![PATH, MIN_COUNT, HAS_VALUE].contains(&q.lexical()) {
                    return Err(Error::unsupported(shape, format!("{q} in sh:property")));
                }
            }
            let (inverse, p) = read_path(v, shape, prop)?
                .ok_or_else(|| Error::unsupported(shape, "sh:property without sh:path"))?;
            let value = v.one(shape, prop, HAS_VALUE)?;
            let min = v.one(shape, prop, MIN_COUNT)?;
            if let Some(m) = min {
                if m.lexical() != "1" {
                    return Err(Error::unsupported(
                        shape,
                        format!("sh:minCount {}", m.lexical()),
                    ));
                }
            }
            if value.is_none() && min.is_none() {
                // a bare path only mentions the predicate
                continue;
            }
            let other = value.cloned().unwrap_or_else(|| y.clone());
            let consequent = if inverse {
                if other.is_literal() {
                    return Err(Error::unsupported(
                        shape,
                        "literal sh:hasValue on an inverse path",
                    ));
                }
                TriplePattern::new(other, p, x.clone())
            } else {
                TriplePattern::new(x.clone(), p, other)
            };
            out.push(ExistentialRule::new(antecedent.clone(), consequent)?);
        }
        for c in v.objects(shape, CLASS) {
            if !c.is_iri() {
                return Err(Error::unsupported(shape, format!("sh:class {c}")));
            }
            let consequent = TriplePattern::new(x.clone(), iri(RDF_TYPE), c.clone());
            out.push(ExistentialRule::new(antecedent.clone(), consequent)?);
        }
        Ok(out)
    }
}

enum NodeRestriction {
    /// Values of `p` on `node` must be in `parts`.
    Values {
        shape: Term,
        p: Term,
        node: Term,
        parts: Vec<ShapePart>,
    },
}

/// Reads a shapes document into a triplestore schema: every mentioned
/// predicate starts fully allowed, each shape narrows the patterns of its
/// predicate or adds existential rules, and predicates narrowed to nothing
/// are dropped.
pub fn translate_shapes(doc: &crate::rdf::Graph) -> Result<ShapeTranslation> {
    let view = ShapesGraph::new(doc);
    check_vocabulary(&view)?;
    let reader = Reader { view: &view };
    let mut st = State {
        patterns: BTreeMap::new(),
        uninstantiable: BTreeSet::new(),
        existentials: BTreeSet::new(),
    };
    for p in mentioned_predicates(&view) {
        st.allow(&p);
    }

    let mut deferred = Vec::new();
    for shape in top_level_shapes(&view) {
        let closed = view.one(shape, shape, CLOSED)?;
        if closed.is_some_and(is_true) {
            for q in view.predicates_of(shape) {
                if ![RDF_TYPE, CLOSED, PROPERTY, IGNORED_PROPERTIES].contains(&q.lexical()) {
                    return Err(Error::unsupported(shape, format!("{q} on a closed shape")));
                }
            }
            for prop in view.objects(shape, PROPERTY) {
                if view.predicates_of(prop).iter().any(|q| q.lexical() != PATH) {
                    return Err(Error::unsupported(
                        shape,
                        "closed shape property with constraints",
                    ));
                }
            }
            continue;
        }
        let Some(target) = target_of(&view, shape)? else {
            continue;
        };
        let x = Term::var("x");
        let z = Term::var("z");
        let objects_of = matches!(target, Target::ObjectsOf(_));
        match target {
            Target::Node(n) => {
                for q in [PROPERTY, CLASS, MIN_COUNT, NODE] {
                    if view.has(shape, q) {
                        return Err(Error::unsupported(shape, format!("{q} with sh:targetNode")));
                    }
                }
                let Some((inverse, p)) = read_path(&view, shape, shape)? else {
                    if reader.constraint(shape, shape, None)?.is_some() {
                        return Err(Error::unsupported(shape, "sh:targetNode without sh:path"));
                    }
                    continue;
                };
                if inverse {
                    return Err(Error::unsupported(
                        shape,
                        "sh:targetNode with sh:inversePath",
                    ));
                }
                if let Some(ds) = reader.constraint(shape, shape, None)? {
                    let classes: Vec<Class> = ds.into_iter().flat_map(|d| d.classes).collect();
                    deferred.push(NodeRestriction::Values {
                        shape: shape.clone(),
                        p,
                        node: n,
                        parts: object_parts(shape, &classes)?,
                    });
                }
            }
            Target::Class(c) => {
                if view.has(shape, PATH) {
                    return Err(Error::unsupported(shape, "sh:path with sh:targetClass"));
                }
                if reader.constraint(shape, shape, None)?.is_some() {
                    return Err(Error::unsupported(
                        shape,
                        "value constraints with sh:targetClass",
                    ));
                }
                let a = TriplePattern::new(x, iri(RDF_TYPE), c);
                st.existentials.extend(reader.existentials(shape, &a)?);
            }
            Target::SubjectsOf(p) | Target::ObjectsOf(p) => {
                if view.has(shape, PATH) {
                    return Err(Error::unsupported(
                        shape,
                        "sh:path with a subjects/objects target",
                    ));
                }
                if let Some(ds) = reader.constraint(shape, shape, Some(&p))? {
                    let mut t: BTreeSet<Pair> = BTreeSet::new();
                    for d in ds {
                        let (subjects, objects) = match (objects_of, &d.link) {
                            (true, None) => (
                                vec![ShapePart::Var { no_literal: true }],
                                object_parts(shape, &d.classes)?,
                            ),
                            (true, Some((Direction::Inverse, _, linked))) => {
                                (subject_parts(linked), object_parts(shape, &d.classes)?)
                            }
                            (false, None) => (
                                subject_parts(&d.classes),
                                vec![ShapePart::Var { no_literal: false }],
                            ),
                            (false, Some((Direction::Forward, _, linked))) => {
                                (subject_parts(&d.classes), object_parts(shape, linked)?)
                            }
                            _ => return Err(Error::unsupported(shape, "sh:node path direction")),
                        };
                        for s in &subjects {
                            for o in &objects {
                                t.insert((s.clone(), o.clone()));
                            }
                        }
                    }
                    st.restrict(&p, &t);
                }
                let a = if objects_of {
                    TriplePattern::new(z, p, x)
                } else {
                    TriplePattern::new(x, p, z)
                };
                st.existentials.extend(reader.existentials(shape, &a)?);
            }
        }
    }

    for r in deferred {
        let NodeRestriction::Values {
            shape,
            p,
            node,
            parts,
        } = r;
        let current = st.patterns.get(&p).cloned().unwrap_or_default();
        let mut next = BTreeSet::new();
        for (s, o) in current {
            match &s {
                ShapePart::Const(c) if *c == node => {
                    next.extend(
                        parts
                            .iter()
                            .filter_map(|e| part_meet(&o, e))
                            .map(|o2| (s.clone(), o2)),
                    );
                }
                ShapePart::Var { .. } => {
                    if !parts.iter().any(|e| part_within(&o, e)) {
                        return Err(Error::unsupported(
                            &shape,
                            format!(
                                "sh:targetNode {node} narrows values that other subjects may use"
                            ),
                        ));
                    }
                    next.insert((s, o));
                }
                _ => {
                    next.insert((s, o));
                }
            }
        }
        if next.is_empty() {
            st.uninstantiable.insert(p.clone());
        }
        st.patterns.insert(p, next);
    }

    let mut keys: BTreeSet<ShapeKey> = BTreeSet::new();
    for (p, pairs) in &st.patterns {
        if st.uninstantiable.contains(p) {
            continue;
        }
        for (s, o) in pairs {
            keys.insert([s.clone(), ShapePart::Const(p.clone()), o.clone()]);
        }
    }
    let schema = schema_from_shape_keys(&keys, st.existentials)?;
    Ok(ShapeTranslation {
        schema: normalize_schema(&schema),
        uninstantiable: st.uninstantiable,
    })
}

/// [`translate_shapes`] without the uninstantiable predicates.
pub fn shacl_to_schema(doc: &crate::rdf::Graph) -> Result<TriplestoreSchema> {
    Ok(translate_shapes(doc)?.schema)
}
