//! Brute-force oracles and small random inputs shared by the integration
//! tests. The oracles only use the data types of the library, never its
//! evaluation code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use schemaforge::engine::InferenceRule;
use schemaforge::rdf::{Graph, GraphPattern, Term, Triple, TriplePattern};
use schemaforge::schema::{ExistentialRule, TriplestoreSchema};

pub type Assignment = BTreeMap<Arc<str>, Term>;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn subst(t: &Term, m: &Assignment) -> Term {
    match t {
        Term::Variable(v) => m.get(v).cloned().unwrap_or_else(|| t.clone()),
        c => c.clone(),
    }
}

pub fn subst_pattern(t: &TriplePattern, m: &Assignment) -> TriplePattern {
    TriplePattern::new(subst(&t.s, m), subst(&t.p, m), subst(&t.o, m))
}

pub fn ground(t: &TriplePattern, m: &Assignment) -> Option<Triple> {
    let g = subst_pattern(t, m);
    Triple::new(g.s, g.p, g.o).ok()
}

/// Every constant occurring in `g`.
pub fn terms_of(g: &Graph) -> Vec<Term> {
    let mut out = BTreeSet::new();
    for t in g.iter() {
        out.insert(t.s().clone());
        out.insert(t.p().clone());
        out.insert(t.o().clone());
    }
    out.into_iter().collect()
}

fn pattern_vars(p: &GraphPattern) -> Vec<Arc<str>> {
    let mut vs = BTreeSet::new();
    for t in p.iter() {
        for x in [&t.s, &t.p, &t.o] {
            if let Term::Variable(v) = x {
                vs.insert(v.clone());
            }
        }
    }
    vs.into_iter().collect()
}

/// All total assignments of the variables of `p` to terms of `g` under
/// which every triple of `p` is in `g`.
pub fn oracle_bgp(p: &GraphPattern, g: &Graph) -> BTreeSet<Assignment> {
    let vars = pattern_vars(p);
    let universe = terms_of(g);
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; vars.len()];
    if !vars.is_empty() && universe.is_empty() {
        return out;
    }
    loop {
        let m: Assignment = vars
            .iter()
            .zip(&idx)
            .map(|(v, &i)| (v.clone(), universe[i].clone()))
            .collect();
        if p.iter()
            .all(|t| ground(t, &m).is_some_and(|x| g.contains(&x)))
        {
            out.insert(m);
        }
        // odometer
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < universe.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// One application of `r`: the consequent under every match, when all of
/// its triples are valid.
pub fn oracle_apply(r: &InferenceRule, g: &Graph) -> Vec<Triple> {
    let mut out = Vec::new();
    for m in oracle_bgp(&r.antecedent, g) {
        let inst: Option<Vec<Triple>> = r.consequent.iter().map(|t| ground(t, &m)).collect();
        out.extend(inst.into_iter().flatten());
    }
    out
}

/// `I₀ = I`, `Iᵢ₊₁ = Iᵢ ∪ ⋃ r(Iᵢ)`, until nothing changes.
pub fn oracle_closure(i: &Graph, rules: &[InferenceRule]) -> Graph {
    let mut cur = i.clone();
    loop {
        let mut next = cur.clone();
        for r in rules {
            for t in oracle_apply(r, &cur) {
                next.insert(t);
            }
        }
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Whether `t` is an instance of pattern `p` with no-literal set `delta`.
pub fn oracle_instantiates(t: &Triple, p: &TriplePattern, delta: &BTreeSet<Arc<str>>) -> bool {
    let mut m: Assignment = BTreeMap::new();
    for (x, v) in [(&p.s, t.s()), (&p.p, t.p()), (&p.o, t.o())] {
        match x {
            Term::Variable(name) => {
                if v.is_literal() && delta.contains(name) {
                    return false;
                }
                if let Some(prev) = m.insert(name.clone(), v.clone()) {
                    if &prev != v {
                        return false;
                    }
                }
            }
            c => {
                if c != v {
                    return false;
                }
            }
        }
    }
    true
}

pub fn oracle_admits(s: &TriplestoreSchema, t: &Triple) -> bool {
    s.graph()
        .iter()
        .any(|p| oracle_instantiates(t, p, s.no_literal()))
}

/// Every triple over `iris` and `literals` that instantiates a pattern of
/// `s`.
pub fn admitted_triples(s: &TriplestoreSchema, iris: &[Term], literals: &[Term]) -> Vec<Triple> {
    let mut out = BTreeSet::new();
    for sub in iris {
        for p in iris {
            for o in iris.iter().chain(literals) {
                let t = Triple::new(sub.clone(), p.clone(), o.clone())
                    .expect("IRI subject and predicate");
                if oracle_admits(s, &t) {
                    out.insert(t);
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Existential rules satisfied on `g` by definition: each match of the
/// antecedent extends to a match of the consequent.
pub fn oracle_satisfied(e: &ExistentialRule, g: &Graph) -> bool {
    let a: GraphPattern = [e.antecedent.clone()].into_iter().collect();
    oracle_bgp(&a, g).iter().all(|m| {
        let c: GraphPattern = [subst_pattern(&e.consequent, m)].into_iter().collect();
        c.iter().all(|t| t.s.is_var() || !t.s.is_literal()) && !oracle_bgp(&c, g).is_empty()
    })
}

/// Calls `f` on every subset of `items` with at most `k` elements.
pub fn for_each_subset<T: Clone>(items: &[T], k: usize, f: &mut impl FnMut(&[T])) {
    fn go<T: Clone>(
        items: &[T],
        start: usize,
        k: usize,
        cur: &mut Vec<T>,
        f: &mut impl FnMut(&[T]),
    ) {
        f(cur);
        if cur.len() == k {
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            go(items, i + 1, k, cur, f);
            cur.pop();
        }
    }
    go(items, 0, k, &mut Vec::new(), f);
}

/// Outcome of checking both inclusions between `r(I)` over small
/// instances and a computed one-rule consequence.
#[derive(Debug, Default)]
pub struct InclusionReport {
    pub instances: usize,
    /// Inferred triples no pattern of the consequence admits.
    pub unsound: Vec<Triple>,
    /// New patterns of the consequence that no inferred triple realizes.
    pub unrealized: Vec<TriplePattern>,
    /// Every triple `r` derived on some enumerated instance.
    pub realized: BTreeSet<Triple>,
}

/// Constants of `s` and `r` plus three fresh IRIs and one fresh literal.
pub fn oracle_universe(s: &TriplestoreSchema, r: &InferenceRule) -> Vec<Term> {
    let mut consts: BTreeSet<Term> = s.graph().constants();
    consts.extend(r.antecedent.constants());
    consts.extend(r.consequent.constants());
    let mut universe: Vec<Term> = consts.into_iter().collect();
    universe.extend((1..=3).map(|i| Term::iri(format!("urn:oracle:{i}"))));
    universe.push(Term::literal("oracle literal"));
    universe
}

/// Triples `r` infers on some instance of `s` with at most `max_triples`
/// triples over [`oracle_universe`], by listing the instances themselves.
/// `None` when more than `max_candidates` triples are admitted.
pub fn inferred_by_subsets(
    s: &TriplestoreSchema,
    r: &InferenceRule,
    max_triples: usize,
    max_candidates: usize,
) -> Option<BTreeSet<Triple>> {
    let universe = oracle_universe(s, r);
    let (literals, iris): (Vec<Term>, Vec<Term>) =
        universe.into_iter().partition(|t| t.is_literal());
    let candidates = admitted_triples(s, &iris, &literals);
    if candidates.len() > max_candidates {
        return None;
    }
    let mut inferred = BTreeSet::new();
    for_each_subset(&candidates, max_triples, &mut |ts| {
        let g: Graph = ts.iter().cloned().collect();
        inferred.extend(oracle_apply(r, &g));
    });
    Some(inferred)
}

/// Applies `r` once to every instance of `s` over the constants of `s` and
/// `r` plus three fresh IRIs and one fresh literal, and compares the
/// inferred triples with `consequence`. Only the matched image of the
/// antecedent matters for one application, and instances without
/// existentials are closed under subsets, so the instances enumerated are
/// the admitted groundings of the antecedent.
pub fn check_one_rule_consequence(
    s: &TriplestoreSchema,
    r: &InferenceRule,
    consequence: &TriplestoreSchema,
) -> InclusionReport {
    let universe = oracle_universe(s, r);
    let vars: Vec<Arc<str>> = r.antecedent.vars().into_iter().collect();

    let mut report = InclusionReport::default();
    let mut unsound: BTreeSet<Triple> = BTreeSet::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let m: Assignment = vars
            .iter()
            .cloned()
            .zip(idx.iter().map(|&i| universe[i].clone()))
            .collect();
        let image: Option<Vec<Triple>> = r.antecedent.iter().map(|t| ground(t, &m)).collect();
        if let Some(image) = image {
            if image.iter().all(|t| oracle_admits(s, t)) {
                report.instances += 1;
                for c in &r.consequent {
                    if let Some(t) = ground(c, &m) {
                        if !oracle_admits(consequence, &t) {
                            unsound.insert(t.clone());
                        }
                        report.realized.insert(t);
                    }
                }
            }
        }
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < universe.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    report.unsound = unsound.into_iter().collect();
    for p in consequence.graph().iter() {
        if s.graph().contains(p) {
            continue;
        }
        if !report
            .realized
            .iter()
            .any(|t| oracle_instantiates(t, p, consequence.no_literal()))
        {
            report.unrealized.push(p.clone());
        }
    }
    report
}

pub const IRIS: [&str; 3] = [":a", ":b", ":c"];
pub const PREDICATES: [&str; 2] = [":p", ":q"];
pub const LITERALS: [&str; 1] = ["1"];
pub const VARS: [&str; 4] = ["x", "y", "z", "w"];

pub fn pick_iri(rng: &mut ChaCha8Rng) -> Term {
    Term::iri(*IRIS.choose(rng).unwrap())
}

pub fn pick_predicate(rng: &mut ChaCha8Rng) -> Term {
    Term::iri(*PREDICATES.choose(rng).unwrap())
}

pub fn pick_object(rng: &mut ChaCha8Rng) -> Term {
    if rng.gen_bool(0.25) {
        Term::literal(*LITERALS.choose(rng).unwrap())
    } else {
        pick_iri(rng)
    }
}

pub fn pick_var(rng: &mut ChaCha8Rng, vars: usize) -> Term {
    Term::var(VARS[rng.gen_range(0..vars.min(VARS.len()))])
}

/// A graph of at most `max` triples over three IRIs, two predicates and
/// one literal.
pub fn random_graph(rng: &mut ChaCha8Rng, max: usize) -> Graph {
    let n = rng.gen_range(0..=max);
    (0..n)
        .map(|_| Triple::new(pick_iri(rng), pick_predicate(rng), pick_object(rng)).unwrap())
        .collect()
}

/// A pattern whose positions are variables with probability one half.
pub fn random_pattern(rng: &mut ChaCha8Rng, vars: usize, var_predicates: bool) -> TriplePattern {
    let s = if rng.gen_bool(0.5) {
        pick_var(rng, vars)
    } else {
        pick_iri(rng)
    };
    let p = if var_predicates && rng.gen_bool(0.2) {
        pick_var(rng, vars)
    } else {
        pick_predicate(rng)
    };
    let o = if rng.gen_bool(0.5) {
        pick_var(rng, vars)
    } else {
        pick_object(rng)
    };
    TriplePattern::new(s, p, o)
}

/// A rule with one to three antecedent triples and one or two consequent
/// triples over the antecedent's variables.
pub fn random_rule(rng: &mut ChaCha8Rng, name: &str) -> InferenceRule {
    loop {
        let n = rng.gen_range(1..=3);
        let a: GraphPattern = (0..n).map(|_| random_pattern(rng, 3, false)).collect();
        let vars: Vec<Term> = a.vars().into_iter().map(Term::var).collect();
        let pick = |rng: &mut ChaCha8Rng, subject: bool| {
            if !vars.is_empty() && rng.gen_bool(0.7) {
                vars.choose(rng).unwrap().clone()
            } else if subject {
                pick_iri(rng)
            } else {
                pick_object(rng)
            }
        };
        let m = rng.gen_range(1..=2);
        let c: GraphPattern = (0..m)
            .map(|_| {
                let s = pick(rng, true);
                let p = pick_predicate(rng);
                let o = pick(rng, false);
                TriplePattern::new(s, p, o)
            })
            .collect();
        if let Ok(r) = InferenceRule::new(name, a, c) {
            return r;
        }
    }
}

pub fn random_rules(rng: &mut ChaCha8Rng, max: usize) -> Vec<InferenceRule> {
    let n = rng.gen_range(1..=max);
    (0..n)
        .map(|i| random_rule(rng, &format!("r{}", i + 1)))
        .collect()
}

/// A linear existential rule sharing one variable between antecedent and
/// consequent.
pub fn random_existential(rng: &mut ChaCha8Rng) -> ExistentialRule {
    let a = TriplePattern::new(
        Term::var("x"),
        pick_predicate(rng),
        if rng.gen_bool(0.7) {
            Term::var("y")
        } else {
            pick_object(rng)
        },
    );
    let other = if rng.gen_bool(0.7) {
        Term::var("z")
    } else {
        pick_iri(rng)
    };
    let c = if rng.gen_bool(0.5) {
        TriplePattern::new(Term::var("x"), pick_predicate(rng), other)
    } else {
        TriplePattern::new(other, pick_predicate(rng), Term::var("x"))
    };
    ExistentialRule::new(a, c).unwrap()
}
