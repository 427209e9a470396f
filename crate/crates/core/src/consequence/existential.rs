use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};

use super::canonical::CanonicalInstance;
use super::rewrite::rewrite_antecedents_within;
use super::simple::{filter_and_annotate, simple_schema_consequence_within, SimpleOutcome};
use super::{choose_lambda, ConsequenceOptions};
use crate::budget::Deadline;
use crate::engine::{chase_with, closure_within, default_chase_bound, InferenceRule};
use crate::error::Result;
use crate::eval::{build_lambda_rewriting, evaluate_union_query_indexed, GraphIndex};
use crate::rdf::{FreshNames, Graph, GraphPattern, Mapping, Term};
use crate::schema::{is_instance, violations, ExistentialRule, TriplestoreSchema, Violation};

/// A violated existential rule with an instance of the schema whose closure
/// violates it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationWitness {
    pub rule: ExistentialRule,
    /// Inference rule whose rewriting produced the witness.
    pub via_rule: String,
    pub instance: Graph,
    pub closure: Graph,
    pub violation: Violation,
}

#[derive(Debug, Clone, Default)]
pub struct ExistentialOutcome {
    pub retained: BTreeSet<ExistentialRule>,
    pub violated: Vec<ViolationWitness>,
}

/// Candidate instance built from one rewriting mapping, with its closure.
struct Candidate {
    instance: Graph,
    closure: Graph,
}

/// Existential rules of `S` that no closure of an instance of `S` under `R`
/// can violate, plus a witness for each one that can be violated.
pub fn retained_existentials(
    s: &TriplestoreSchema,
    rules: &[InferenceRule],
) -> Result<ExistentialOutcome> {
    retained_existentials_within(s, rules, &ConsequenceOptions::default(), &Deadline::none())
}

pub fn retained_existentials_within(
    s: &TriplestoreSchema,
    rules: &[InferenceRule],
    opts: &ConsequenceOptions,
    deadline: &Deadline,
) -> Result<ExistentialOutcome> {
    let existentials: Vec<ExistentialRule> = s.existentials().iter().cloned().collect();
    let mut used: BTreeSet<Term> = s.all_constants();
    for r in rules {
        used.extend(r.antecedent.constants());
        used.extend(r.consequent.constants());
    }
    let lambda = choose_lambda(&used);
    let graph_only = s.without_existentials();
    let sandbox = CanonicalInstance::sandbox(&graph_only, lambda.clone());
    let sandbox_index = GraphIndex::new(&sandbox.graph);

    let mut names = FreshNames::new();
    for c in &used {
        names.observe(c);
    }

    let mut cache: HashMap<usize, Vec<Candidate>> = HashMap::new();
    let mut outcome = ExistentialOutcome::default();

    for e in &existentials {
        let a: GraphPattern = [e.antecedent.clone()].into_iter().collect();
        let qa = build_lambda_rewriting(&a, &lambda, false);
        let mut witness = None;
        'rules: for (ri, r) in rules.iter().enumerate() {
            deadline.check()?;
            let consequent_sandbox: Graph = r
                .consequent
                .iter()
                .filter_map(|t| {
                    t.map_terms(|_, x| {
                        if x.is_var() {
                            lambda.clone()
                        } else {
                            x.clone()
                        }
                    })
                    .to_triple()
                })
                .collect();
            let triggered = !evaluate_union_query_indexed(
                &qa,
                &GraphIndex::new(&consequent_sandbox),
                deadline,
            )?
            .is_empty();
            if !triggered {
                continue;
            }
            let cands = match cache.entry(ri) {
                Entry::Occupied(o) => o.into_mut(),
                Entry::Vacant(v) => v.insert(candidates(
                    s,
                    &existentials,
                    r,
                    rules,
                    opts,
                    &sandbox,
                    &sandbox_index,
                    &mut names,
                    deadline,
                )?),
            };
            for cand in cands.iter() {
                if let Some(v) = violations([e], &cand.closure).into_iter().next() {
                    witness = Some(ViolationWitness {
                        rule: e.clone(),
                        via_rule: r.name.clone(),
                        instance: cand.instance.clone(),
                        closure: cand.closure.clone(),
                        violation: v,
                    });
                    break 'rules;
                }
            }
        }
        match witness {
            Some(w) => outcome.violated.push(w),
            None => {
                outcome.retained.insert(e.clone());
            }
        }
    }
    Ok(outcome)
}

/// Groundings of the rewritings of `r`'s antecedent that are instances of
/// `S` once chased, with their closures. They do not depend on the
/// existential rule being checked.
#[allow(clippy::too_many_arguments)]
fn candidates(
    s: &TriplestoreSchema,
    existentials: &[ExistentialRule],
    r: &InferenceRule,
    rules: &[InferenceRule],
    opts: &ConsequenceOptions,
    sandbox: &CanonicalInstance<'_>,
    sandbox_index: &GraphIndex<'_>,
    names: &mut FreshNames,
    deadline: &Deadline,
) -> Result<Vec<Candidate>> {
    let lambda = &sandbox.lambda;
    let mut out = Vec::new();
    let mut seen: BTreeSet<Graph> = BTreeSet::new();
    for w in rewrite_antecedents_within(r, rules, opts.rewrite_depth, deadline)? {
        let q = build_lambda_rewriting(&w.antecedent, lambda, sandbox.prune_predicate_lambda);
        let ms = evaluate_union_query_indexed(&q, sandbox_index, deadline)?;
        for m in ms {
            deadline.tick()?;
            let Some(fm) = filter_and_annotate(&m, &w.antecedent, &GraphPattern::new(), sandbox)
            else {
                continue;
            };
            let kept = fm.mapping.filtered(|x| x != lambda);
            let partial = kept.apply(&w.antecedent);
            let mut g = Mapping::new();
            for v in partial.vars() {
                g.bind(v, names.fresh_iri());
            }
            let Some(ig) = g.apply(&partial).to_graph() else {
                continue;
            };
            let bound = default_chase_bound(&ig, existentials);
            let chased = chase_with(&ig, existentials, names, bound)?;
            if !is_instance(&chased, s) || !seen.insert(chased.clone()) {
                continue;
            }
            let closure = closure_within(&chased, rules, deadline)?;
            out.push(Candidate {
                instance: chased,
                closure,
            });
        }
    }
    Ok(out)
}

/// `con^ex(S, R)`: the graph and no-literal set of `con(S, R)` with the
/// existential rules that no closure can violate.
pub fn existential_schema_consequence(
    s: &TriplestoreSchema,
    rules: &[InferenceRule],
    opts: &ConsequenceOptions,
) -> Result<TriplestoreSchema> {
    Ok(existential_schema_consequence_within(s, rules, opts, &Deadline::none())?.0)
}

pub fn existential_schema_consequence_within(
    s: &TriplestoreSchema,
    rules: &[InferenceRule],
    opts: &ConsequenceOptions,
    deadline: &Deadline,
) -> Result<(TriplestoreSchema, SimpleOutcome, ExistentialOutcome)> {
    let simple = simple_schema_consequence_within(s, rules, opts, deadline)?;
    let ex = retained_existentials_within(s, rules, opts, deadline)?;
    let schema = simple.schema.with_existentials(ex.retained.iter().cloned());
    Ok((schema, simple, ex))
}
