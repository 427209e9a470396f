//! Triplestore schemas: allowed triple patterns, the no-literal set and
//! existential rules.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::budget::Deadline;
use crate::error::{Error, Result};
use crate::eval::{evaluate_bgp_indexed, GraphIndex};
use crate::rdf::{Graph, GraphPattern, Mapping, Position, Term, Triple, TriplePattern};

/// A linear existential rule `a →∃ c`. Variables of `c` that do not occur
/// in `a` are existentially quantified.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExistentialRule {
    pub antecedent: TriplePattern,
    pub consequent: TriplePattern,
}

impl ExistentialRule {
    pub fn new(antecedent: TriplePattern, consequent: TriplePattern) -> Result<Self> {
        for t in [&antecedent, &consequent] {
            if !t.is_well_formed() {
                return Err(Error::InvalidSchema(format!(
                    "existential rule pattern {t} has a literal outside the object position"
                )));
            }
        }
        Ok(ExistentialRule {
            antecedent,
            consequent,
        })
    }

    /// Variables renamed `v1, v2, ...` in order of first appearance.
    pub fn canonical(&self) -> ExistentialRule {
        let mut names: HashMap<Arc<str>, Term> = HashMap::new();
        let mut rename = |t: &Term| match t {
            Term::Variable(v) => {
                let n = names.len() + 1;
                names
                    .entry(v.clone())
                    .or_insert_with(|| Term::var(format!("v{n}")))
                    .clone()
            }
            c => c.clone(),
        };
        let antecedent = self.antecedent.map_terms(|_, t| rename(t));
        let consequent = self.consequent.map_terms(|_, t| rename(t));
        ExistentialRule {
            antecedent,
            consequent,
        }
    }
}

impl fmt::Display for ExistentialRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.antecedent, self.consequent)
    }
}

/// A mapping of an existential rule's antecedent that has no witness for the
/// consequent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub mapping: Mapping,
    pub rule: ExistentialRule,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriplestoreSchema {
    graph: GraphPattern,
    no_literal: BTreeSet<Arc<str>>,
    existentials: BTreeSet<ExistentialRule>,
}

impl TriplestoreSchema {
    /// Checks every structural invariant: well-formed patterns, each
    /// variable at most once in the graph, the no-literal set drawn from the
    /// graph's variables and covering every subject and predicate variable.
    pub fn new(
        graph: GraphPattern,
        no_literal: impl IntoIterator<Item = Arc<str>>,
        existentials: impl IntoIterator<Item = ExistentialRule>,
    ) -> Result<Self> {
        let s = TriplestoreSchema {
            graph,
            no_literal: no_literal.into_iter().collect(),
            existentials: existentials.into_iter().collect(),
        };
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn from_parts_unchecked(
        graph: GraphPattern,
        no_literal: BTreeSet<Arc<str>>,
        existentials: BTreeSet<ExistentialRule>,
    ) -> Self {
        let s = TriplestoreSchema {
            graph,
            no_literal,
            existentials,
        };
        debug_assert!(s.validate().is_ok(), "{:?}", s.validate());
        s
    }

    pub fn empty() -> Self {
        TriplestoreSchema::default()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen: HashSet<&Arc<str>> = HashSet::new();
        for t in &self.graph {
            if !t.is_well_formed() {
                return Err(Error::InvalidSchema(format!(
                    "pattern {t} has a literal outside the object position"
                )));
            }
            for v in t.vars() {
                if !seen.insert(v) {
                    return Err(Error::InvalidSchema(format!(
                        "variable ?{v} occurs more than once in the schema graph"
                    )));
                }
            }
            for pos in [Position::Subject, Position::Predicate] {
                if let Some(v) = t.get(pos).as_var() {
                    if !self.no_literal.contains(v) {
                        return Err(Error::InvalidSchema(format!(
                            "?{v} is in {pos:?} position of {t} but not in the no-literal set"
                        )));
                    }
                }
            }
        }
        if let Some(v) = self.no_literal.iter().find(|v| !seen.contains(v)) {
            return Err(Error::InvalidSchema(format!(
                "no-literal variable ?{v} does not occur in the schema graph"
            )));
        }
        for e in &self.existentials {
            if !e.antecedent.is_well_formed() || !e.consequent.is_well_formed() {
                return Err(Error::InvalidSchema(format!(
                    "ill-formed existential rule {e}"
                )));
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> &GraphPattern {
        &self.graph
    }

    pub fn no_literal(&self) -> &BTreeSet<Arc<str>> {
        &self.no_literal
    }

    pub fn existentials(&self) -> &BTreeSet<ExistentialRule> {
        &self.existentials
    }

    pub fn is_no_literal(&self, v: &str) -> bool {
        self.no_literal.contains(v)
    }

    /// Whether the term at an object position may be bound to a literal:
    /// literals themselves and variables outside the no-literal set.
    pub fn allows_literal(&self, t: &Term) -> bool {
        match t {
            Term::Literal(_) => true,
            Term::Variable(v) => !self.no_literal.contains(v),
            Term::Iri(_) => false,
        }
    }

    /// Same schema with a different existential part.
    pub fn with_existentials(
        &self,
        existentials: impl IntoIterator<Item = ExistentialRule>,
    ) -> Self {
        TriplestoreSchema {
            graph: self.graph.clone(),
            no_literal: self.no_literal.clone(),
            existentials: existentials.into_iter().collect(),
        }
    }

    pub fn without_existentials(&self) -> Self {
        self.with_existentials([])
    }

    /// Constants of the schema graph.
    pub fn constants(&self) -> BTreeSet<Term> {
        self.graph.constants()
    }

    /// Constants of the graph and of the existential rules.
    pub fn all_constants(&self) -> BTreeSet<Term> {
        let mut out = self.graph.constants();
        for e in &self.existentials {
            for t in e.antecedent.terms().into_iter().chain(e.consequent.terms()) {
                if t.is_constant() {
                    out.insert(t.clone());
                }
            }
        }
        out
    }

    pub fn has_variable_predicate(&self) -> bool {
        self.graph.iter().any(|t| t.p.is_var())
    }
}

/// Whether `t` is an instantiation of `ts`: some mapping sends `ts` to `t`
/// without binding a variable of `delta` to a literal.
pub fn triple_instantiates(t: &Triple, ts: &TriplePattern, delta: &BTreeSet<Arc<str>>) -> bool {
    let mut bound: [Option<(&Arc<str>, &Term)>; 3] = [None; 3];
    for (k, (pat, val)) in ts.terms().into_iter().zip(t.terms()).enumerate() {
        match pat {
            Term::Variable(v) => {
                if val.is_literal() && delta.contains(v) {
                    return false;
                }
                if bound[..k]
                    .iter()
                    .flatten()
                    .any(|(w, x)| *w == v && *x != val)
                {
                    return false;
                }
                bound[k] = Some((v, val));
            }
            c => {
                if c != val {
                    return false;
                }
            }
        }
    }
    true
}

/// Schema graph patterns grouped by constant predicate, for repeated
/// instantiation checks.
pub(crate) struct PatternIndex<'s> {
    by_pred: HashMap<&'s Term, Vec<&'s TriplePattern>>,
    var_pred: Vec<&'s TriplePattern>,
    delta: &'s BTreeSet<Arc<str>>,
}

impl<'s> PatternIndex<'s> {
    pub fn new(graph: &'s GraphPattern, delta: &'s BTreeSet<Arc<str>>) -> Self {
        let mut by_pred: HashMap<&Term, Vec<&TriplePattern>> = HashMap::new();
        let mut var_pred = Vec::new();
        for t in graph {
            if t.p.is_var() {
                var_pred.push(t);
            } else {
                by_pred.entry(&t.p).or_default().push(t);
            }
        }
        PatternIndex {
            by_pred,
            var_pred,
            delta,
        }
    }

    pub fn instantiates_some(&self, t: &Triple) -> bool {
        self.by_pred
            .get(t.p())
            .into_iter()
            .flatten()
            .chain(self.var_pred.iter())
            .any(|ts| triple_instantiates(t, ts, self.delta))
    }
}

/// `I` is an instance of `S`: every triple instantiates a schema pattern and
/// no existential rule is violated.
pub fn is_instance(i: &Graph, s: &TriplestoreSchema) -> bool {
    let idx = PatternIndex::new(&s.graph, &s.no_literal);
    i.iter().all(|t| idx.instantiates_some(t))
        && violations_indexed(s.existentials.iter(), &GraphIndex::new(i), true).is_empty()
}

/// Every pair `⟨m, e⟩` where `m` matches the antecedent of `e` in `I` and
/// `m(c)` has no match in `I`.
pub fn violations<'a>(
    e: impl IntoIterator<Item = &'a ExistentialRule>,
    i: &Graph,
) -> BTreeSet<Violation> {
    violations_indexed(e, &GraphIndex::new(i), false)
}

fn violations_indexed<'a>(
    e: impl IntoIterator<Item = &'a ExistentialRule>,
    index: &GraphIndex<'_>,
    first_only: bool,
) -> BTreeSet<Violation> {
    let none = Deadline::none();
    let mut out = BTreeSet::new();
    for rule in e {
        let a: GraphPattern = [rule.antecedent.clone()].into_iter().collect();
        let ms = evaluate_bgp_indexed(&a, index, &none).expect("no deadline");
        for m in ms {
            let mc: GraphPattern = [m.apply_triple(&rule.consequent)].into_iter().collect();
            let witnessed = mc.is_well_formed()
                && !evaluate_bgp_indexed(&mc, index, &none)
                    .expect("no deadline")
                    .is_empty();
            if !witnessed {
                out.insert(Violation {
                    mapping: m,
                    rule: rule.clone(),
                });
                if first_only {
                    return out;
                }
            }
        }
    }
    out
}

/// `𝕀(⟨S1^G, S1^Δ, ∅⟩) ⊆ 𝕀(⟨S2^G, S2^Δ, ∅⟩)`, decided by checking a finite
/// set of representative instantiations of each pattern of `s1`.
pub fn schema_contains(s1: &TriplestoreSchema, s2: &TriplestoreSchema) -> bool {
    let mut consts: BTreeSet<Term> = s1.constants();
    consts.extend(s2.constants());
    let fresh_iri = fresh_constant(&consts, Term::iri, "urn:representative:");
    let fresh_lit = fresh_constant(&consts, Term::literal, "representative ");
    let idx = PatternIndex::new(&s2.graph, &s2.no_literal);

    let iris: Vec<Term> = consts
        .iter()
        .filter(|c| c.is_iri())
        .cloned()
        .chain([fresh_iri])
        .collect();
    let all: Vec<Term> = consts
        .iter()
        .cloned()
        .chain(iris.last().cloned())
        .chain([fresh_lit])
        .collect();

    s1.graph.iter().all(|t| {
        let choices: Vec<&[Term]> = t
            .positions()
            .map(|(pos, term)| -> &[Term] {
                match term {
                    Term::Variable(v) if pos == Position::Object && !s1.no_literal.contains(v) => {
                        &all
                    }
                    Term::Variable(_) => &iris,
                    c => std::slice::from_ref(c),
                }
            })
            .collect();
        choices[0].iter().all(|s| {
            choices[1].iter().all(|p| {
                choices[2]
                    .iter()
                    .all(|o| match Triple::new(s.clone(), p.clone(), o.clone()) {
                        Ok(tr) => idx.instantiates_some(&tr),
                        // a literal constant in a subject or predicate variable's
                        // range cannot be produced, so there is nothing to cover
                        Err(_) => true,
                    })
            })
        })
    })
}

fn fresh_constant(consts: &BTreeSet<Term>, make: fn(String) -> Term, prefix: &str) -> Term {
    (0..)
        .map(|i| make(format!("{prefix}{i}")))
        .find(|t| !consts.contains(t))
        .expect("unbounded")
}

/// Same instances of the graph part, and the same existential rules up to
/// variable renaming.
pub fn schema_equivalent(s1: &TriplestoreSchema, s2: &TriplestoreSchema) -> bool {
    let canon = |s: &TriplestoreSchema| -> BTreeSet<ExistentialRule> {
        s.existentials
            .iter()
            .map(ExistentialRule::canonical)
            .collect()
    };
    canon(s1) == canon(s2) && schema_contains(s1, s2) && schema_contains(s2, s1)
}

/// Position of a schema pattern reduced to what matters for instantiation:
/// a constant, or a variable with its no-literal flag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ShapePart {
    Const(Term),
    Var { no_literal: bool },
}

pub type ShapeKey = [ShapePart; 3];

pub fn shape_key(t: &TriplePattern, delta: &BTreeSet<Arc<str>>) -> ShapeKey {
    let part = |x: &Term| match x {
        Term::Variable(v) => ShapePart::Var {
            no_literal: delta.contains(v),
        },
        c => ShapePart::Const(c.clone()),
    };
    [part(&t.s), part(&t.p), part(&t.o)]
}

/// The keys a pattern with key `k` is subsumed by, including `k` itself.
fn generalizations(k: &ShapeKey) -> Vec<ShapeKey> {
    let options = |p: &ShapePart| -> Vec<ShapePart> {
        let any = ShapePart::Var { no_literal: false };
        let iri = ShapePart::Var { no_literal: true };
        match p {
            ShapePart::Const(Term::Literal(_)) => vec![p.clone(), any],
            ShapePart::Const(_) => vec![p.clone(), iri, any],
            ShapePart::Var { no_literal: true } => vec![iri, any],
            ShapePart::Var { no_literal: false } => vec![any],
        }
    };
    let [a, b, c] = k;
    let (oa, ob, oc) = (options(a), options(b), options(c));
    let mut out = Vec::with_capacity(oa.len() * ob.len() * oc.len());
    for x in &oa {
        for y in &ob {
            for z in &oc {
                out.push([x.clone(), y.clone(), z.clone()]);
            }
        }
    }
    out
}

/// Drops patterns subsumed by another pattern, renames graph variables
/// `v1, v2, ...` in a canonical order and renames each existential rule's
/// variables by first appearance. Equivalent schemas built from the same
/// pattern shapes normalize to identical values.
pub fn normalize_schema(s: &TriplestoreSchema) -> TriplestoreSchema {
    let keys: BTreeSet<ShapeKey> = s
        .graph
        .iter()
        .map(|t| shape_key(t, &s.no_literal))
        .collect();
    let kept: Vec<&ShapeKey> = keys
        .iter()
        .filter(|k| {
            !generalizations(k)
                .iter()
                .any(|g| g != *k && keys.contains(g))
        })
        .collect();

    let existentials = s
        .existentials
        .iter()
        .map(ExistentialRule::canonical)
        .collect();
    let (graph, no_literal) = patterns_from_keys(kept);
    TriplestoreSchema::from_parts_unchecked(graph, no_literal, existentials)
}

fn patterns_from_keys<'a>(
    keys: impl IntoIterator<Item = &'a ShapeKey>,
) -> (GraphPattern, BTreeSet<Arc<str>>) {
    let mut graph = GraphPattern::new();
    let mut no_literal = BTreeSet::new();
    let mut n = 0usize;
    for k in keys {
        let mut term = |p: &ShapePart| match p {
            ShapePart::Const(c) => c.clone(),
            ShapePart::Var { no_literal: nl } => {
                n += 1;
                let name: Arc<str> = Arc::from(format!("v{n}"));
                if *nl {
                    no_literal.insert(name.clone());
                }
                Term::Variable(name)
            }
        };
        let t = TriplePattern::new(term(&k[0]), term(&k[1]), term(&k[2]));
        graph.insert(t);
    }
    (graph, no_literal)
}

/// Builds a schema with one pattern per key. Fails when a key is not a
/// valid schema pattern, such as a literal subject or a subject variable
/// that allows literals.
pub fn schema_from_shape_keys<'a>(
    keys: impl IntoIterator<Item = &'a ShapeKey>,
    existentials: impl IntoIterator<Item = ExistentialRule>,
) -> Result<TriplestoreSchema> {
    let (graph, no_literal) = patterns_from_keys(keys);
    TriplestoreSchema::new(graph, no_literal, existentials)
}

/// The normalized graph part as a set of shape keys; two schemas with equal
/// key sets are equivalent.
pub fn shape_keys(s: &TriplestoreSchema) -> BTreeSet<ShapeKey> {
    s.graph
        .iter()
        .map(|t| shape_key(t, &s.no_literal))
        .collect()
}

/// Builds a schema from patterns whose variables may repeat or clash:
/// every variable occurrence is renamed apart, and an occurrence is put in
/// the no-literal set when its original variable is in `delta` or it sits in
/// subject or predicate position.
pub fn schema_from_patterns<'a>(
    patterns: impl IntoIterator<Item = &'a TriplePattern>,
    delta: &BTreeSet<Arc<str>>,
    existentials: impl IntoIterator<Item = ExistentialRule>,
) -> Result<TriplestoreSchema> {
    let mut graph = GraphPattern::new();
    let mut no_literal = BTreeSet::new();
    let mut n = 0usize;
    for t in patterns {
        if !t.is_well_formed() {
            return Err(Error::InvalidSchema(format!(
                "pattern {t} has a literal outside the object position"
            )));
        }
        let t2 = t.map_terms(|pos, x| match x {
            Term::Variable(v) => {
                n += 1;
                let name: Arc<str> = Arc::from(format!("v{n}"));
                if delta.contains(v) || pos != Position::Object {
                    no_literal.insert(name.clone());
                }
                Term::Variable(name)
            }
            c => c.clone(),
        });
        graph.insert(t2);
    }
    TriplestoreSchema::new(graph, no_literal, existentials)
}
