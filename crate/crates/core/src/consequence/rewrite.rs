//! Backward chaining of rule antecedents.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use crate::budget::Deadline;
use crate::engine::InferenceRule;
use crate::error::{Error, Result};
use crate::rdf::{FreshNames, GraphPattern, Term, TriplePattern};

pub const DEFAULT_REWRITE_DEPTH: usize = 16;
/// Rewritings kept before the search is declared divergent.
pub const MAX_REWRITINGS: usize = 256;

/// An antecedent from which the source rule's antecedent can be derived by
/// applying rules forward `depth` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewriting {
    pub antecedent: GraphPattern,
    pub source_rule: String,
    pub depth: usize,
}

type Bindings = BTreeMap<Arc<str>, Term>;

fn resolve(b: &Bindings, t: &Term) -> Term {
    let mut cur = t.clone();
    while let Term::Variable(v) = &cur {
        match b.get(v) {
            Some(next) => cur = next.clone(),
            None => break,
        }
    }
    cur
}

/// Most general unifier of two triple patterns.
fn unify(a: &TriplePattern, b: &TriplePattern) -> Option<Bindings> {
    let mut bind = Bindings::new();
    for (x, y) in a.terms().into_iter().zip(b.terms()) {
        let x = resolve(&bind, x);
        let y = resolve(&bind, y);
        if x == y {
            continue;
        }
        match (&x, &y) {
            (Term::Variable(v), _) => {
                bind.insert(v.clone(), y);
            }
            (_, Term::Variable(v)) => {
                bind.insert(v.clone(), x);
            }
            _ => return None,
        }
    }
    Some(bind)
}

fn apply(b: &Bindings, t: &TriplePattern) -> TriplePattern {
    t.map_terms(|_, x| resolve(b, x))
}

/// A homomorphism from `from` into `to`: variables of `from` mapped to terms
/// of `to` so that every triple of `from` lands in `to`.
pub(crate) fn maps_into(from: &GraphPattern, to: &GraphPattern) -> bool {
    let dst: Vec<&TriplePattern> = to.iter().collect();
    // per source triple, the targets agreeing on its constants
    let mut cands: Vec<(&TriplePattern, Vec<&TriplePattern>)> = Vec::with_capacity(from.len());
    for t in from {
        let c: Vec<&TriplePattern> = dst
            .iter()
            .copied()
            .filter(|d| {
                t.terms()
                    .into_iter()
                    .zip(d.terms())
                    .all(|(x, y)| x.is_var() || x == y)
            })
            .collect();
        if c.is_empty() {
            return false;
        }
        cands.push((t, c));
    }

    fn fits(src: &TriplePattern, d: &TriplePattern, h: &[(Arc<str>, Term)]) -> bool {
        src.terms()
            .into_iter()
            .zip(d.terms())
            .all(|(x, y)| match x {
                Term::Variable(v) => h.iter().find(|(k, _)| k == v).is_none_or(|(_, b)| b == y),
                _ => true,
            })
    }

    // most constrained source triple first, given the bindings so far
    fn go(
        cands: &mut Vec<(&TriplePattern, Vec<&TriplePattern>)>,
        h: &mut Vec<(Arc<str>, Term)>,
    ) -> bool {
        if cands.is_empty() {
            return true;
        }
        let mut best: Option<(usize, Vec<&TriplePattern>)> = None;
        for (i, (src, targets)) in cands.iter().enumerate() {
            let ok: Vec<&TriplePattern> = targets
                .iter()
                .copied()
                .filter(|d| fits(src, d, h))
                .collect();
            if ok.is_empty() {
                return false;
            }
            if best.as_ref().is_none_or(|(_, b)| ok.len() < b.len()) {
                best = Some((i, ok));
            }
        }
        let (i, options) = best.expect("non-empty");
        let entry = cands.swap_remove(i);
        for cand in options {
            let mark = h.len();
            for (x, y) in entry.0.terms().into_iter().zip(cand.terms()) {
                if let Term::Variable(v) = x {
                    if !h.iter().any(|(k, _)| k == v) {
                        h.push((v.clone(), y.clone()));
                    }
                }
            }
            if go(cands, h) {
                return true;
            }
            h.truncate(mark);
        }
        cands.push(entry);
        let last = cands.len() - 1;
        cands.swap(i, last);
        false
    }
    go(&mut cands, &mut Vec::new())
}

/// The antecedent of `r` and every antecedent obtained by repeatedly
/// resolving one of its triples against a rule consequent. A rewriting is
/// dropped when an earlier one maps into it.
pub fn rewrite_antecedents(
    r: &InferenceRule,
    rules: &[InferenceRule],
    max_depth: usize,
) -> Result<Vec<Rewriting>> {
    rewrite_antecedents_within(r, rules, max_depth, &Deadline::none())
}

pub fn rewrite_antecedents_within(
    r: &InferenceRule,
    rules: &[InferenceRule],
    max_depth: usize,
    deadline: &Deadline,
) -> Result<Vec<Rewriting>> {
    let mut names = FreshNames::with_prefixes("w", "urn:unused:");
    names.observe_pattern(&r.antecedent);
    for q in rules {
        names.observe_pattern(&q.antecedent);
        names.observe_pattern(&q.consequent);
    }

    let mut out = vec![Rewriting {
        antecedent: r.antecedent.clone(),
        source_rule: r.name.clone(),
        depth: 0,
    }];
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        let current = out[i].antecedent.clone();
        let depth = out[i].depth;
        for t in &current {
            for q in rules {
                // rename the rule apart
                let renaming: Bindings = q
                    .antecedent
                    .vars()
                    .into_iter()
                    .map(|v| (v, names.fresh_var()))
                    .collect();
                for c in &q.consequent {
                    deadline.tick()?;
                    let c = apply(&renaming, c);
                    let Some(mgu) = unify(t, &c) else { continue };
                    let mut next: GraphPattern = current
                        .iter()
                        .filter(|x| *x != t)
                        .map(|x| apply(&mgu, x))
                        .collect();
                    next.extend(
                        q.antecedent
                            .iter()
                            .map(|x| apply(&mgu, &apply(&renaming, x))),
                    );
                    if !next.is_well_formed() {
                        continue;
                    }
                    if out.iter().any(|w| maps_into(&w.antecedent, &next)) {
                        continue;
                    }
                    if depth + 1 > max_depth || out.len() >= MAX_REWRITINGS {
                        return Err(Error::RewritingDiverged {
                            rule: r.name.clone(),
                            depth: depth + 1,
                        });
                    }
                    out.push(Rewriting {
                        antecedent: next,
                        source_rule: r.name.clone(),
                        depth: depth + 1,
                    });
                    queue.push_back(out.len() - 1);
                }
            }
        }
    }
    Ok(out)
}
