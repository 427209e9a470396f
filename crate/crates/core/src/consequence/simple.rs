use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use super::canonical::{build_critical_within, CanonicalInstance};
use super::{choose_lambda, Algorithm, ConsequenceOptions};
use crate::budget::Deadline;
use crate::engine::InferenceRule;
use crate::error::Result;
use crate::eval::{
    build_lambda_rewriting, evaluate_bgp_indexed, evaluate_union_query_indexed, GraphIndex,
};
use crate::rdf::{FreshNames, GraphPattern, Mapping, Term, TriplePattern};
use crate::schema::{normalize_schema, ShapeKey, ShapePart, TriplestoreSchema};

/// A mapping that survived filtering, with its temporary no-literal set
/// `Δ^m`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FilteredMapping {
    pub mapping: Mapping,
    pub temp_no_literal: BTreeSet<Arc<str>>,
}

/// Rule variables in subject or predicate position of `a` or `c`.
fn seed_no_literal(a: &GraphPattern, c: &GraphPattern) -> BTreeSet<Arc<str>> {
    a.iter()
        .chain(c.iter())
        .flat_map(|t| [&t.s, &t.p])
        .filter_map(|x| x.as_var().cloned())
        .collect()
}

/// Each antecedent triple with the rewritings that are checked against the
/// canonical instance.
fn antecedent_alternatives(
    a: &GraphPattern,
    canon: &CanonicalInstance<'_>,
) -> Vec<(TriplePattern, Vec<TriplePattern>)> {
    match canon.algorithm {
        Algorithm::Critical => a.iter().map(|t| (t.clone(), vec![t.clone()])).collect(),
        Algorithm::Score => {
            let q = build_lambda_rewriting(a, &canon.lambda, canon.prune_predicate_lambda);
            q.source.iter().cloned().zip(q.disjunct_lists).collect()
        }
    }
}

fn filter_with(
    m: &Mapping,
    alternatives: &[(TriplePattern, Vec<TriplePattern>)],
    seed: &BTreeSet<Arc<str>>,
    canon: &CanonicalInstance<'_>,
) -> Option<FilteredMapping> {
    let schema = canon.schema();
    let mut dm = seed.clone();
    for (ta, alts) in alternatives {
        let object = match &ta.o {
            Term::Variable(v) => m.get(v)?.clone(),
            c => c.clone(),
        };
        let needs_origins = object.is_literal() || (ta.o.is_var() && object == canon.lambda);
        if !needs_origins {
            continue;
        }
        let mut literal_ok = false;
        let mut object_ok = false;
        for tq in alts {
            let Some(t) = m.apply_triple(tq).to_triple() else {
                continue;
            };
            if !canon.graph.contains(&t) {
                continue;
            }
            for ts in canon.origins(&t) {
                let open = matches!(&ts.o, Term::Variable(v) if !schema.is_no_literal(v));
                literal_ok |= open;
                object_ok |= open || ts.o == object;
            }
        }
        if object.is_literal() {
            if !object_ok {
                return None;
            }
        } else if !literal_ok {
            if let Term::Variable(v) = &ta.o {
                dm.insert(v.clone());
            }
        }
    }
    if m.iter().any(|(v, x)| x.is_literal() && dm.contains(v)) {
        return None;
    }
    Some(FilteredMapping {
        mapping: m.clone(),
        temp_no_literal: dm,
    })
}

/// Filters a mapping computed over a canonical instance: rejects it when
/// the antecedent would need a literal where the schema forbids one, and
/// otherwise records which rule variables cannot be literals.
pub fn filter_and_annotate(
    m: &Mapping,
    a: &GraphPattern,
    c: &GraphPattern,
    canon: &CanonicalInstance<'_>,
) -> Option<FilteredMapping> {
    let alts = antecedent_alternatives(a, canon);
    filter_with(m, &alts, &seed_no_literal(a, c), canon)
}

/// Shapes of the consequent triples under a filtered mapping: constants
/// stay, `λ`-bound variables become variables that are no-literal when
/// they are in `Δ^m`.
fn expansion_keys(fm: &FilteredMapping, c: &GraphPattern, lambda: &Term) -> Vec<ShapeKey> {
    c.iter()
        .map(|t| {
            let part = |x: &Term| match x {
                Term::Variable(v) => match fm.mapping.get(v) {
                    Some(val) if val != lambda => ShapePart::Const(val.clone()),
                    _ => ShapePart::Var {
                        no_literal: fm.temp_no_literal.contains(v),
                    },
                },
                k => ShapePart::Const(k.clone()),
            };
            [part(&t.s), part(&t.p), part(&t.o)]
        })
        .collect()
}

/// Pattern with a fresh variable per variable slot, and the fresh
/// variables that go into the no-literal set.
fn materialize(key: &ShapeKey, names: &mut FreshNames) -> (TriplePattern, Vec<Arc<str>>) {
    let mut delta = Vec::new();
    let mut term = |p: &ShapePart| match p {
        ShapePart::Const(c) => c.clone(),
        ShapePart::Var { no_literal } => {
            let v = names.fresh_var();
            if *no_literal {
                delta.push(v.as_var().expect("variable").clone());
            }
            v
        }
    };
    let t = TriplePattern::new(term(&key[0]), term(&key[1]), term(&key[2]));
    (t, delta)
}

/// Adds `s^m(m(C))` to `s`, with a fresh variable for every occurrence of a
/// `λ`-bound variable.
pub fn expand_schema(
    s: &TriplestoreSchema,
    fm: &FilteredMapping,
    c: &GraphPattern,
    lambda: &Term,
) -> TriplestoreSchema {
    let mut names = FreshNames::new();
    names.observe_pattern(s.graph());
    let mut graph = s.graph().clone();
    let mut delta = s.no_literal().clone();
    for key in expansion_keys(fm, c, lambda) {
        let (t, d) = materialize(&key, &mut names);
        graph.insert(t);
        delta.extend(d);
    }
    TriplestoreSchema::from_parts_unchecked(graph, delta, BTreeSet::new())
}

/// Shapes a single rule adds to a schema, and whether any mapping survived.
fn rule_additions(
    s: &TriplestoreSchema,
    r: &InferenceRule,
    opts: &ConsequenceOptions,
    deadline: &Deadline,
) -> Result<(bool, Vec<ShapeKey>)> {
    let mut used: BTreeSet<Term> = s.constants();
    used.extend(r.antecedent.constants());
    used.extend(r.consequent.constants());
    let lambda = choose_lambda(&used);

    let (canon, mappings) = match opts.algorithm {
        Algorithm::Score => {
            let canon = CanonicalInstance::sandbox(s, lambda.clone());
            let q = build_lambda_rewriting(&r.antecedent, &lambda, canon.prune_predicate_lambda);
            let ms = evaluate_union_query_indexed(&q, &GraphIndex::new(&canon.graph), deadline)?;
            (canon, ms)
        }
        Algorithm::Critical => {
            let g = build_critical_within(s, r, &lambda, opts.critical_budget, deadline)?;
            let canon = CanonicalInstance::new(Algorithm::Critical, s, lambda.clone(), g);
            let ms = evaluate_bgp_indexed(&r.antecedent, &GraphIndex::new(&canon.graph), deadline)?;
            (canon, ms)
        }
    };

    let alts = antecedent_alternatives(&r.antecedent, &canon);
    let seed = seed_no_literal(&r.antecedent, &r.consequent);
    let mut applicable = false;
    let mut seen: HashSet<ShapeKey> = HashSet::new();
    let mut out = Vec::new();
    for m in &mappings {
        deadline.tick()?;
        let Some(fm) = filter_with(m, &alts, &seed, &canon) else {
            continue;
        };
        applicable = true;
        for key in expansion_keys(&fm, &r.consequent, &lambda) {
            if seen.insert(key.clone()) {
                out.push(key);
            }
        }
    }
    Ok((applicable, out))
}

#[derive(Debug, Clone)]
pub struct BasicOutcome {
    pub schema: TriplestoreSchema,
    pub applicable: bool,
}

/// `r(S)`: `⟨S^G, S^Δ, ∅⟩` extended by the consequent of `r` under every
/// surviving mapping.
pub fn basic_consequence(
    s: &TriplestoreSchema,
    r: &InferenceRule,
    opts: &ConsequenceOptions,
) -> Result<BasicOutcome> {
    basic_consequence_within(s, r, opts, &Deadline::none())
}

pub fn basic_consequence_within(
    s: &TriplestoreSchema,
    r: &InferenceRule,
    opts: &ConsequenceOptions,
    deadline: &Deadline,
) -> Result<BasicOutcome> {
    let (applicable, keys) = rule_additions(s, r, opts, deadline)?;
    let mut names = FreshNames::new();
    names.observe_pattern(s.graph());
    let mut graph = s.graph().clone();
    let mut delta = s.no_literal().clone();
    for key in &keys {
        let (t, d) = materialize(key, &mut names);
        graph.insert(t);
        delta.extend(d);
    }
    Ok(BasicOutcome {
        schema: TriplestoreSchema::from_parts_unchecked(graph, delta, BTreeSet::new()),
        applicable,
    })
}

#[derive(Debug, Clone)]
pub struct SimpleOutcome {
    pub schema: TriplestoreSchema,
    pub applicable: BTreeSet<String>,
    pub rounds: usize,
}

/// `con(S, R)`: basic consequences of every rule, repeated until the
/// normalized schema stops changing. The result has no existential rules.
pub fn simple_schema_consequence(
    s: &TriplestoreSchema,
    rules: &[InferenceRule],
    opts: &ConsequenceOptions,
) -> Result<TriplestoreSchema> {
    Ok(simple_schema_consequence_within(s, rules, opts, &Deadline::none())?.schema)
}

pub fn simple_schema_consequence_within(
    s: &TriplestoreSchema,
    rules: &[InferenceRule],
    opts: &ConsequenceOptions,
    deadline: &Deadline,
) -> Result<SimpleOutcome> {
    let mut cur = normalize_schema(&s.without_existentials());
    let mut applicable = BTreeSet::new();
    let mut rounds = 0;
    loop {
        deadline.check()?;
        rounds += 1;
        let mut names = FreshNames::new();
        names.observe_pattern(cur.graph());
        let mut graph = cur.graph().clone();
        let mut delta = cur.no_literal().clone();
        for r in rules {
            let (fired, keys) = rule_additions(&cur, r, opts, deadline)?;
            if fired {
                applicable.insert(r.name.clone());
            }
            for key in &keys {
                let (t, d) = materialize(key, &mut names);
                graph.insert(t);
                delta.extend(d);
            }
        }
        let next = normalize_schema(&TriplestoreSchema::from_parts_unchecked(
            graph,
            delta,
            BTreeSet::new(),
        ));
        if next == cur {
            return Ok(SimpleOutcome {
                schema: cur,
                applicable,
                rounds,
            });
        }
        cur = next;
    }
}

/// Names of the rules that fire on some instance of some schema reached
/// while computing `con(S, R)`.
pub fn applicable_rules(
    s: &TriplestoreSchema,
    rules: &[InferenceRule],
) -> Result<BTreeSet<String>> {
    Ok(simple_schema_consequence_within(
        s,
        rules,
        &ConsequenceOptions::default(),
        &Deadline::none(),
    )?
    .applicable)
}
