//! Datalog inference rules, closure and the restricted chase.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::budget::Deadline;
use crate::error::{Error, Result};
use crate::eval::{evaluate_bgp_indexed, join, GraphIndex, JoinEntry};
use crate::rdf::{FreshNames, Graph, GraphPattern, Mapping, Term, Triple, TriplePattern};
use crate::schema::ExistentialRule;

/// A datalog rule `A → C` without existential variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InferenceRule {
    pub name: String,
    pub antecedent: GraphPattern,
    pub consequent: GraphPattern,
}

impl InferenceRule {
    pub fn new(
        name: impl Into<String>,
        antecedent: GraphPattern,
        consequent: GraphPattern,
    ) -> Result<Self> {
        let name = name.into();
        let bad = |reason: String| Error::InvalidRule {
            rule: name.clone(),
            reason,
        };
        for t in antecedent.iter().chain(consequent.iter()) {
            if !t.is_well_formed() {
                return Err(bad(format!(
                    "{t} has a literal outside the object position"
                )));
            }
        }
        let avars = antecedent.vars();
        for t in &consequent {
            if t.p.is_var() {
                return Err(bad(format!(
                    "consequent triple {t} has a variable predicate"
                )));
            }
            if t.s.is_var() && t.s == t.o {
                return Err(bad(format!(
                    "consequent triple {t} repeats a variable in subject and object"
                )));
            }
            if let Some(v) = t.vars().find(|v| !avars.contains(*v)) {
                return Err(bad(format!(
                    "consequent variable ?{v} does not occur in the antecedent"
                )));
            }
        }
        Ok(InferenceRule {
            name,
            antecedent,
            consequent,
        })
    }
}

impl fmt::Display for InferenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {{ {} }} -> {{ {} }}",
            self.name, self.antecedent, self.consequent
        )
    }
}

/// Instantiates `c` under every mapping, keeping only valid triples.
fn instantiate(c: &GraphPattern, ms: &BTreeSet<Mapping>, out: &mut Vec<Triple>) {
    for m in ms {
        let inst: Option<Vec<Triple>> = c.iter().map(|t| m.apply_triple(t).to_triple()).collect();
        if let Some(ts) = inst {
            out.extend(ts);
        }
    }
}

/// `r(I) = I ∪ ⋃ m(C)` over the matches of `A` whose instantiation of `C`
/// is a valid RDF graph.
pub fn apply_rule(r: &InferenceRule, i: &Graph) -> Graph {
    let idx = GraphIndex::new(i);
    let ms = evaluate_bgp_indexed(&r.antecedent, &idx, &Deadline::none()).expect("no deadline");
    let mut new = Vec::new();
    instantiate(&r.consequent, &ms, &mut new);
    let mut out = i.clone();
    out.extend(new);
    out
}

/// Least fixpoint of `R` over `I`, computed semi-naively.
pub fn closure(i: &Graph, rules: &[InferenceRule]) -> Graph {
    closure_within(i, rules, &Deadline::none()).expect("no deadline")
}

pub fn closure_within(i: &Graph, rules: &[InferenceRule], deadline: &Deadline) -> Result<Graph> {
    let mut total = i.clone();
    let mut old = Graph::new();
    let mut delta = i.clone();
    while !delta.is_empty() {
        deadline.check()?;
        let old_idx = GraphIndex::new(&old);
        let delta_idx = GraphIndex::new(&delta);
        let total_idx = GraphIndex::new(&total);
        let mut derived = Vec::new();
        for r in rules {
            let pats: Vec<TriplePattern> = r.antecedent.iter().cloned().collect();
            let required = r.antecedent.vars();
            // matches using at least one new triple: the k-th atom reads the
            // delta, earlier atoms the old facts, later atoms everything
            for k in 0..pats.len() {
                let entries: Vec<JoinEntry> = pats
                    .iter()
                    .enumerate()
                    .map(|(j, t)| JoinEntry {
                        alternatives: std::slice::from_ref(t),
                        index: match j.cmp(&k) {
                            std::cmp::Ordering::Less => &old_idx,
                            std::cmp::Ordering::Equal => &delta_idx,
                            std::cmp::Ordering::Greater => &total_idx,
                        },
                    })
                    .collect();
                let ms = join(&entries, &required, deadline, true)?;
                instantiate(&r.consequent, &ms, &mut derived);
            }
            if pats.is_empty() && old.is_empty() {
                let ms = BTreeSet::from([Mapping::new()]);
                instantiate(&r.consequent, &ms, &mut derived);
            }
        }
        let fresh: Graph = derived.into_iter().filter(|t| !total.contains(t)).collect();
        old = total.clone();
        total.extend(fresh.iter().cloned());
        delta = fresh;
    }
    Ok(total)
}

/// Closure by plain re-application of every rule until nothing changes.
pub fn naive_closure(i: &Graph, rules: &[InferenceRule]) -> Graph {
    let mut cur = i.clone();
    loop {
        let mut next = cur.clone();
        for r in rules {
            next = next.union(&apply_rule(r, &cur));
        }
        if next.len() == cur.len() {
            return cur;
        }
        cur = next;
    }
}

fn has_match(p: &TriplePattern, g: &Graph) -> bool {
    g.iter().any(|t| {
        let mut bound: Vec<(&Arc<str>, &Term)> = Vec::with_capacity(3);
        p.terms()
            .into_iter()
            .zip(t.terms())
            .all(|(pt, v)| match pt {
                Term::Variable(name) => match bound.iter().find(|(n, _)| *n == name) {
                    Some((_, b)) => *b == v,
                    None => {
                        bound.push((name, v));
                        true
                    }
                },
                c => c == v,
            })
    })
}

/// Default step bound of the chase: `10·(|I|+|E|)²`.
pub fn default_chase_bound(i: &Graph, e: &[ExistentialRule]) -> usize {
    let n = i.len() + e.len();
    10 * n * n
}

/// Restricted chase: while some match `m` of an antecedent has no witness
/// for `m(c)`, add `m(c)` with its remaining variables replaced by fresh
/// IRIs. Matches whose consequent cannot form a valid triple (a literal
/// bound into subject position) are left violated.
pub fn chase_existentials(i: &Graph, e: &[ExistentialRule]) -> Result<Graph> {
    let mut names = FreshNames::new();
    names.observe_graph(i);
    for r in e {
        names.observe_triple(&r.antecedent);
        names.observe_triple(&r.consequent);
    }
    chase_with(i, e, &mut names, default_chase_bound(i, e))
}

pub fn chase_with(
    i: &Graph,
    e: &[ExistentialRule],
    names: &mut FreshNames,
    max_steps: usize,
) -> Result<Graph> {
    let mut cur = i.clone();
    let mut steps = 0usize;
    loop {
        let mut changed = false;
        for rule in e {
            let a: GraphPattern = [rule.antecedent.clone()].into_iter().collect();
            let ms = {
                let idx = GraphIndex::new(&cur);
                evaluate_bgp_indexed(&a, &idx, &Deadline::none())?
            };
            for m in ms {
                let mc = m.apply_triple(&rule.consequent);
                if !mc.is_well_formed() || has_match(&mc, &cur) {
                    continue;
                }
                let mut g = Mapping::new();
                for v in mc.vars() {
                    if !g.contains(v) {
                        g.bind(v.clone(), names.fresh_iri());
                    }
                }
                let Some(t) = g.apply_triple(&mc).to_triple() else {
                    continue;
                };
                cur.insert(t);
                changed = true;
                steps += 1;
                if steps > max_steps {
                    return Err(Error::ChaseDiverged { steps });
                }
            }
        }
        if !changed {
            return Ok(cur);
        }
    }
}
