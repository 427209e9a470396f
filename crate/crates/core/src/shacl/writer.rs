use std::collections::{BTreeMap, BTreeSet};

use super::subsumes;
use super::view::*;
use crate::error::{Error, Result};
use crate::rdf::{FreshNames, Graph, Term, Triple, RDF_TYPE};
use crate::schema::{shape_keys, ExistentialRule, ShapePart, TriplestoreSchema};

type Pair = (ShapePart, ShapePart);

struct Writer {
    out: Vec<Triple>,
    names: FreshNames,
}

impl Writer {
    fn fresh(&mut self) -> Term {
        self.names.fresh_iri()
    }

    fn add(&mut self, s: &Term, p: &str, o: Term) {
        self.out
            .push(Triple::new(s.clone(), iri(p), o).expect("shape subjects are IRIs"));
    }

    fn node_shape(&mut self) -> Term {
        let i = self.fresh();
        self.add(&i, RDF_TYPE, iri(NODE_SHAPE));
        i
    }

    fn list(&mut self, items: &[Term]) -> Term {
        let mut out = Vec::new();
        let names = &mut self.names;
        let head = build_list(items, || names.fresh_iri(), &mut out);
        self.out.extend(out);
        head
    }

    /// Constraint nodes admitting exactly the terms of `e`; returns their
    /// names.
    fn compute_constraints(&mut self, e: &BTreeSet<ShapePart>) -> Vec<Term> {
        let mut heads = Vec::new();
        if e.contains(&ShapePart::Var { no_literal: false }) {
            let b = self.fresh();
            self.add(&b, NODE_KIND, iri(IRI_OR_LITERAL));
            heads.push(b);
            return heads;
        }
        if e.contains(&ShapePart::Var { no_literal: true }) {
            let b = self.fresh();
            self.add(&b, NODE_KIND, iri(IRI));
            heads.push(b);
        }
        let constants: Vec<Term> = e
            .iter()
            .filter_map(|x| match x {
                ShapePart::Const(c) => Some(c.clone()),
                ShapePart::Var { .. } => None,
            })
            .collect();
        if !constants.is_empty() {
            let b = self.fresh();
            let l = self.list(&constants);
            self.add(&b, IN, l);
            heads.push(b);
        }
        heads
    }

    fn add_constraints(&mut self, i: &Term, heads: &[Term]) {
        let l = self.list(heads);
        self.add(i, OR, l);
    }

    /// The shapes for the patterns `pairs` of predicate `p`.
    fn compute_shape(&mut self, p: &Term, pairs: &BTreeSet<Pair>) {
        let constant_subjects: BTreeSet<&ShapePart> = pairs
            .iter()
            .map(|(s, _)| s)
            .filter(|s| matches!(s, ShapePart::Const(_)))
            .collect();

        // values allowed on each constant subject
        for c in &constant_subjects {
            let i = self.node_shape();
            let ShapePart::Const(node) = c else {
                unreachable!()
            };
            self.add(&i, TARGET_NODE, node.clone());
            self.add(&i, PATH, p.clone());
            let e: BTreeSet<ShapePart> = pairs
                .iter()
                .filter(|(s, _)| subsumes(c, s))
                .map(|(_, o)| o.clone())
                .collect();
            let heads = self.compute_constraints(&e);
            self.add_constraints(&i, &heads);
        }

        let has_variable_subject = pairs
            .iter()
            .any(|(s, _)| matches!(s, ShapePart::Var { .. }));
        let i = self.node_shape();
        if !has_variable_subject {
            self.add(&i, TARGET_SUBJECTS_OF, p.clone());
            let e: BTreeSet<ShapePart> = constant_subjects.into_iter().cloned().collect();
            let heads = self.compute_constraints(&e);
            self.add_constraints(&i, &heads);
            return;
        }

        self.add(&i, TARGET_OBJECTS_OF, p.clone());
        let c: BTreeSet<ShapePart> = pairs
            .iter()
            .filter(|(s, _)| matches!(s, ShapePart::Var { .. }))
            .map(|(_, o)| o.clone())
            .collect();
        let mut heads = self.compute_constraints(&c);
        // objects only reachable through constant subjects, each guarded by
        // the subjects that may point at it
        let mut linked: BTreeSet<&ShapePart> = BTreeSet::new();
        for (s, o) in pairs {
            if matches!(s, ShapePart::Const(_)) {
                linked.extend(pairs.iter().map(|(_, o2)| o2).filter(|o2| subsumes(o2, o)));
            }
        }
        for o in linked {
            let d: BTreeSet<ShapePart> = pairs
                .iter()
                .filter(|(_, o2)| subsumes(o, o2))
                .map(|(s2, _)| s2.clone())
                .collect();
            let b = self.node_shape();
            let b1 = self.fresh();
            let b2 = self.fresh();
            self.add(&b, PROPERTY, b1.clone());
            self.add(&b1, PATH, b2.clone());
            self.add(&b2, INVERSE_PATH, p.clone());
            let h = self.compute_constraints(&d);
            self.add_constraints(&b1, &h);
            let n = self.compute_constraints(&BTreeSet::from([o.clone()]));
            debug_assert_eq!(n.len(), 1);
            self.add(&n[0], NODE, b);
            heads.push(n[0].clone());
        }
        self.add_constraints(&i, &heads);
    }

    /// The shape of an existential rule; returns the predicates it
    /// mentions.
    fn existential(&mut self, e: &ExistentialRule) -> Result<Vec<Term>> {
        let e = e.canonical();
        let (a, c) = (&e.antecedent, &e.consequent);
        let bad = |why: &str| Error::unsupported(&e, why.to_string());
        if a.p.is_var() || c.p.is_var() {
            return Err(bad("variable predicate"));
        }
        let a_vars: BTreeSet<&Term> = a.terms().into_iter().filter(|t| t.is_var()).collect();
        let focus = [&c.s, &c.o]
            .into_iter()
            .filter(|t| a_vars.contains(t))
            .collect::<Vec<_>>();
        let [x] = focus.as_slice() else {
            return Err(bad(
                "consequent must share exactly one variable with the antecedent",
            ));
        };
        let x = (*x).clone();
        let (target, target_term) = if a.s == x && a.p.lexical() == RDF_TYPE && a.o.is_iri() {
            (TARGET_CLASS, a.o.clone())
        } else if a.s == x && a.o.is_var() && a.o != x {
            (TARGET_SUBJECTS_OF, a.p.clone())
        } else if a.o == x && a.s.is_var() && a.s != x {
            (TARGET_OBJECTS_OF, a.p.clone())
        } else {
            return Err(bad("antecedent does not match a target"));
        };
        let (inverse, other) = if c.s == x {
            (false, &c.o)
        } else {
            (true, &c.s)
        };

        let i = self.node_shape();
        self.add(&i, target, target_term);
        let mut mentioned = vec![if target == TARGET_CLASS {
            iri(RDF_TYPE)
        } else {
            a.p.clone()
        }];
        mentioned.push(c.p.clone());
        if !inverse && c.p.lexical() == RDF_TYPE && other.is_iri() {
            self.add(&i, CLASS, other.clone());
            return Ok(mentioned);
        }
        let prop = self.fresh();
        self.add(&i, PROPERTY, prop.clone());
        if inverse {
            let path = self.fresh();
            self.add(&prop, PATH, path.clone());
            self.add(&path, INVERSE_PATH, c.p.clone());
        } else {
            self.add(&prop, PATH, c.p.clone());
        }
        if other.is_var() {
            self.add(&prop, MIN_COUNT, Term::literal("1"));
        } else {
            self.add(&prop, HAS_VALUE, other.clone());
        }
        Ok(mentioned)
    }
}

/// Writes shapes whose reading is equivalent to `s`: one template shape per
/// existential rule, the per-predicate shapes for the graph, an empty
/// `sh:or` for predicates only existential rules use, and a closed shape
/// listing the vocabulary.
pub fn schema_to_shacl(s: &TriplestoreSchema) -> Result<Graph> {
    if s.has_variable_predicate() {
        return Err(Error::unsupported("schema", "variable predicate"));
    }
    let mut names = FreshNames::with_prefixes("unused", "_:b");
    for c in s.all_constants() {
        names.observe(&c);
    }
    let mut w = Writer {
        out: Vec::new(),
        names,
    };

    let mut vocabulary: BTreeSet<Term> = BTreeSet::new();
    let mut from_existentials: BTreeSet<Term> = BTreeSet::new();
    for e in s.existentials() {
        from_existentials.extend(w.existential(e)?);
    }

    let mut by_predicate: BTreeMap<Term, BTreeSet<Pair>> = BTreeMap::new();
    for [sp, pp, op] in shape_keys(s) {
        let ShapePart::Const(p) = pp else {
            unreachable!("constant predicates checked above")
        };
        by_predicate.entry(p).or_default().insert((sp, op));
    }
    for (p, pairs) in &by_predicate {
        w.compute_shape(p, pairs);
        vocabulary.insert(p.clone());
    }
    for p in &from_existentials {
        if !by_predicate.contains_key(p) {
            let i = w.node_shape();
            w.add(&i, TARGET_SUBJECTS_OF, p.clone());
            w.add(&i, OR, iri(RDF_NIL));
        }
        vocabulary.insert(p.clone());
    }

    let closed = w.node_shape();
    w.add(&closed, CLOSED, Term::literal("true"));
    for p in vocabulary {
        let prop = w.fresh();
        w.add(&closed, PROPERTY, prop.clone());
        w.add(&prop, PATH, p);
    }
    Ok(w.out.into_iter().collect())
}
