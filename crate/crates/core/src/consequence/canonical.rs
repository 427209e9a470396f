use std::collections::{BTreeSet, HashMap};

use super::Algorithm;
use crate::budget::Deadline;
use crate::engine::InferenceRule;
use crate::error::{Error, Result};
use crate::rdf::{Graph, Position, Term, Triple, TriplePattern};
use crate::schema::TriplestoreSchema;

/// `𝕊(S)`: every schema variable replaced by `lambda`.
pub fn build_sandbox(s: &TriplestoreSchema, lambda: &Term) -> Graph {
    s.graph()
        .iter()
        .map(|t| {
            t.map_terms(|_, x| {
                if x.is_var() {
                    lambda.clone()
                } else {
                    x.clone()
                }
            })
            .to_triple()
            .expect("schema patterns are well formed")
        })
        .collect()
}

/// `ℂ(S, r)`: every schema variable replaced in every possible way by a
/// constant of `S^G`, of the antecedent of `r`, or `lambda`. Literals only
/// replace object variables outside the no-literal set.
pub fn build_critical(
    s: &TriplestoreSchema,
    r: &InferenceRule,
    lambda: &Term,
    budget: usize,
) -> Result<Graph> {
    build_critical_within(s, r, lambda, budget, &Deadline::none())
}

pub(crate) fn build_critical_within(
    s: &TriplestoreSchema,
    r: &InferenceRule,
    lambda: &Term,
    budget: usize,
    deadline: &Deadline,
) -> Result<Graph> {
    let mut consts: BTreeSet<Term> = s.constants();
    consts.extend(r.antecedent.constants());
    consts.insert(lambda.clone());
    let iris: Vec<Term> = consts.iter().filter(|c| c.is_iri()).cloned().collect();
    let all: Vec<Term> = consts.into_iter().collect();

    let choices = |t: &TriplePattern| -> Vec<Vec<Term>> {
        t.positions()
            .map(|(pos, x)| match x {
                Term::Variable(v) if pos == Position::Object && !s.is_no_literal(v) => all.clone(),
                Term::Variable(_) => iris.clone(),
                c => vec![c.clone()],
            })
            .collect()
    };

    let mut size = 0usize;
    for t in s.graph() {
        let n = choices(t)
            .iter()
            .map(Vec::len)
            .fold(1usize, |a, b| a.saturating_mul(b));
        size = size.saturating_add(n);
    }
    if size > budget {
        return Err(Error::BudgetExceeded {
            what: "critical instance",
            limit: budget,
        });
    }

    let mut g = Graph::new();
    for t in s.graph() {
        let ch = choices(t);
        for a in &ch[0] {
            deadline.check()?;
            for b in &ch[1] {
                for c in &ch[2] {
                    deadline.tick()?;
                    g.insert(
                        Triple::new(a.clone(), b.clone(), c.clone())
                            .expect("valid by construction"),
                    );
                }
            }
        }
    }
    Ok(g)
}

/// Whether `value` can stand at position `pos` of a canonical-instance
/// triple produced from schema term `ts`.
fn permits(ts: &Term, pos: Position, value: &Term, s: &TriplestoreSchema, lambda: &Term) -> bool {
    match ts {
        Term::Variable(v) => {
            value == lambda
                || value.is_iri()
                || (value.is_literal() && pos == Position::Object && !s.is_no_literal(v))
        }
        c => c == value,
    }
}

/// The schema patterns a canonical-instance triple can arise from.
pub fn find_origin_patterns<'s>(
    t: &Triple,
    s: &'s TriplestoreSchema,
    lambda: &Term,
) -> Vec<&'s TriplePattern> {
    s.graph()
        .iter()
        .filter(|ts| {
            ts.positions()
                .all(|(pos, x)| permits(x, pos, t.get(pos), s, lambda))
        })
        .collect()
}

/// A canonical instance of a schema together with what is needed to filter
/// mappings computed over it.
pub struct CanonicalInstance<'s> {
    pub algorithm: Algorithm,
    pub lambda: Term,
    pub graph: Graph,
    /// Leave `λ` out of predicate positions of the rewriting.
    pub prune_predicate_lambda: bool,
    schema: &'s TriplestoreSchema,
    by_pred: HashMap<Term, Vec<&'s TriplePattern>>,
    var_pred: Vec<&'s TriplePattern>,
}

impl<'s> CanonicalInstance<'s> {
    pub fn new(
        algorithm: Algorithm,
        schema: &'s TriplestoreSchema,
        lambda: Term,
        graph: Graph,
    ) -> Self {
        let mut by_pred: HashMap<Term, Vec<&TriplePattern>> = HashMap::new();
        let mut var_pred = Vec::new();
        for t in schema.graph() {
            if t.p.is_var() {
                var_pred.push(t);
            } else {
                by_pred.entry(t.p.clone()).or_default().push(t);
            }
        }
        CanonicalInstance {
            algorithm,
            lambda,
            graph,
            prune_predicate_lambda: !schema.has_variable_predicate(),
            schema,
            by_pred,
            var_pred,
        }
    }

    pub fn sandbox(schema: &'s TriplestoreSchema, lambda: Term) -> Self {
        let g = build_sandbox(schema, &lambda);
        CanonicalInstance::new(Algorithm::Score, schema, lambda, g)
    }

    pub fn schema(&self) -> &'s TriplestoreSchema {
        self.schema
    }

    /// Same as [`find_origin_patterns`], using the predicate index.
    pub fn origins(&self, t: &Triple) -> impl Iterator<Item = &'s TriplePattern> + '_ {
        let t = t.clone();
        let from_pred: &[&'s TriplePattern] = if t.p() == &self.lambda {
            &[]
        } else {
            self.by_pred.get(t.p()).map(Vec::as_slice).unwrap_or(&[])
        };
        let lambda_pred: Vec<&'s TriplePattern> = if t.p() == &self.lambda {
            self.by_pred.values().flatten().copied().collect()
        } else {
            Vec::new()
        };
        from_pred
            .iter()
            .copied()
            .chain(lambda_pred)
            .chain(self.var_pred.iter().copied())
            .filter(move |ts| {
                ts.positions()
                    .all(|(pos, x)| permits(x, pos, t.get(pos), self.schema, &self.lambda))
            })
    }
}
