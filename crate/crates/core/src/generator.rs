//! Synthetic schemas and chain rules for benchmarks.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::InferenceRule;
use crate::error::{Error, Result};
use crate::rdf::{GraphPattern, Position, Term, TriplePattern};
use crate::schema::{shape_key, ExistentialRule, ShapeKey, TriplestoreSchema};

/// How many times a collision is redrawn per requested item before the
/// generator settles for fewer.
const ATTEMPTS_PER_ITEM: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Probability that a subject or object is a constant.
    pub pi_c: f64,
    pub p_count: usize,
    pub u_count: usize,
    pub l_count: usize,
    pub schema_size: usize,
    pub rule_count: usize,
    pub existential_count: usize,
    pub antecedent_len: usize,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.pi_c) {
            return Err(Error::InvalidConfig(format!(
                "pi_c = {} is not a probability",
                self.pi_c
            )));
        }
        for (name, v) in [
            ("p_count", self.p_count),
            ("u_count", self.u_count),
            ("l_count", self.l_count),
            ("schema_size", self.schema_size),
            ("rule_count", self.rule_count),
            ("antecedent_len", self.antecedent_len),
        ] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub schema: TriplestoreSchema,
    pub rules: Vec<InferenceRule>,
}

pub fn predicate_name(i: usize) -> Term {
    Term::iri(format!(":m{i}"))
}

pub fn iri_name(i: usize) -> Term {
    Term::iri(format!(":u{i}"))
}

pub fn literal_name(i: usize) -> Term {
    Term::literal(format!("l{i}"))
}

struct Gen<'c> {
    cfg: &'c GeneratorConfig,
    rng: ChaCha8Rng,
    next_var: usize,
}

impl Gen<'_> {
    fn var(&mut self, prefix: &str) -> Term {
        self.next_var += 1;
        Term::var(format!("{prefix}{}", self.next_var))
    }

    fn predicate(&mut self) -> Term {
        predicate_name(self.rng.gen_range(1..=self.cfg.p_count))
    }

    fn iri(&mut self) -> Term {
        iri_name(self.rng.gen_range(1..=self.cfg.u_count))
    }

    fn constant(&mut self) -> bool {
        self.rng.gen_bool(self.cfg.pi_c)
    }

    fn object_constant(&mut self) -> Term {
        if self.rng.gen_bool(0.5) {
            self.iri()
        } else {
            literal_name(self.rng.gen_range(1..=self.cfg.l_count))
        }
    }

    fn subject_or(&mut self, v: Term) -> Term {
        if self.constant() {
            self.iri()
        } else {
            v
        }
    }

    fn object_or(&mut self, v: Term) -> Term {
        if self.constant() {
            self.object_constant()
        } else {
            v
        }
    }

    fn chain_rule(&mut self, name: String) -> InferenceRule {
        let n = self.cfg.antecedent_len;
        let mut nodes = vec![self.subject_or(Term::var("v0"))];
        for i in 1..n {
            nodes.push(self.subject_or(Term::var(format!("v{i}"))));
        }
        nodes.push(self.object_or(Term::var(format!("v{n}"))));
        let antecedent: GraphPattern = (0..n)
            .map(|i| {
                let p = self.predicate();
                TriplePattern::new(nodes[i].clone(), p, nodes[i + 1].clone())
            })
            .collect();
        let p = self.predicate();
        let consequent: GraphPattern = [TriplePattern::new(nodes[0].clone(), p, nodes[n].clone())]
            .into_iter()
            .collect();
        InferenceRule::new(name, antecedent, consequent).expect("chain rules are valid")
    }

    fn random_pattern(&mut self) -> TriplePattern {
        let s = self.var("s");
        let s = self.subject_or(s);
        let p = self.predicate();
        let o = self.var("o");
        let o = self.object_or(o);
        TriplePattern::new(s, p, o)
    }

    /// `t` with every variable replaced by a new one.
    fn rename_apart(&mut self, t: &TriplePattern) -> TriplePattern {
        let mut map: BTreeMap<Arc<str>, Term> = BTreeMap::new();
        t.map_terms(|pos, x| match x {
            Term::Variable(v) => {
                let prefix = if pos == Position::Object { "o" } else { "s" };
                if !map.contains_key(v) {
                    let fresh = self.var(prefix);
                    map.insert(v.clone(), fresh);
                }
                map[v].clone()
            }
            c => c.clone(),
        })
    }

    /// An existential rule whose antecedent is a rule consequent and whose
    /// consequent is an antecedent triple, sharing one variable.
    fn existential(
        &mut self,
        consequents: &[TriplePattern],
        antecedents: &[TriplePattern],
    ) -> ExistentialRule {
        let a = consequents
            .choose(&mut self.rng)
            .expect("at least one rule");
        let mut a = self.rename_apart(a);
        // both ends must be variables for the rule to have a shape
        if !a.s.is_var() {
            a.s = self.var("s");
        }
        if !a.o.is_var() {
            a.o = self.var("o");
        }
        let c = antecedents
            .choose(&mut self.rng)
            .expect("at least one rule");
        let mut c = self.rename_apart(c);
        let x = if self.rng.gen_bool(0.5) {
            a.s.clone()
        } else {
            a.o.clone()
        };
        if self.rng.gen_bool(0.5) {
            c.s = x;
        } else {
            c.o = x;
        }
        ExistentialRule::new(a, c).expect("IRI or variable subjects")
    }
}

/// Argument positions of an existential rule set, for the weak acyclicity
/// test.
type Place = (Term, bool);

fn place(t: &TriplePattern, pos: Position) -> Place {
    (t.p.clone(), pos == Position::Object)
}

/// Weak acyclicity of `rules`: no cycle of the position dependency graph
/// goes through an edge into an existential position. Guarantees that the
/// chase terminates.
pub fn weakly_acyclic(rules: &[ExistentialRule]) -> bool {
    let mut normal: BTreeSet<(Place, Place)> = BTreeSet::new();
    let mut special: BTreeSet<(Place, Place)> = BTreeSet::new();
    for r in rules {
        let (a, c) = (&r.antecedent, &r.consequent);
        let a_vars: BTreeSet<&Arc<str>> = a.vars().collect();
        let frontier: Vec<Place> = a
            .positions()
            .filter(|(_, t)| matches!(t.as_var(), Some(v) if c.vars().any(|w| w == v)))
            .map(|(p, _)| place(a, p))
            .collect();
        for (cp, t) in c.positions() {
            let Some(v) = t.as_var() else { continue };
            if a_vars.contains(v) {
                for (ap, at) in a.positions() {
                    if at == t {
                        normal.insert((place(a, ap), place(c, cp)));
                    }
                }
            } else {
                for f in &frontier {
                    special.insert((f.clone(), place(c, cp)));
                }
            }
        }
    }
    let mut succ: BTreeMap<&Place, Vec<&Place>> = BTreeMap::new();
    for (u, v) in normal.iter().chain(special.iter()) {
        succ.entry(u).or_default().push(v);
    }
    let reaches = |from: &Place, to: &Place| {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                stack.extend(succ.get(n).into_iter().flatten().copied());
            }
        }
        false
    };
    special.iter().all(|(u, v)| !reaches(v, u))
}

/// A schema and chain rules drawn from `cfg`. The same configuration always
/// yields the same output.
pub fn generate(cfg: &GeneratorConfig) -> Result<Generated> {
    cfg.validate()?;
    let mut g = Gen {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        next_var: 0,
    };

    let mut rules: Vec<InferenceRule> = Vec::new();
    let mut attempts = 0;
    while rules.len() < cfg.rule_count && attempts < ATTEMPTS_PER_ITEM * cfg.rule_count {
        attempts += 1;
        let r = g.chain_rule(format!("r{}", rules.len() + 1));
        if !rules
            .iter()
            .any(|q| q.antecedent == r.antecedent && q.consequent == r.consequent)
        {
            rules.push(r);
        }
    }

    let mut graph = GraphPattern::new();
    let mut delta: BTreeSet<Arc<str>> = BTreeSet::new();
    let mut keys: BTreeSet<ShapeKey> = BTreeSet::new();
    let mut add = |t: TriplePattern, graph: &mut GraphPattern, delta: &mut BTreeSet<Arc<str>>| {
        let mut d = BTreeSet::new();
        for pos in [Position::Subject, Position::Predicate] {
            if let Some(v) = t.get(pos).as_var() {
                d.insert(v.clone());
            }
        }
        if !keys.insert(shape_key(&t, &d)) {
            return false;
        }
        delta.extend(d);
        graph.insert(t);
        true
    };

    let seeded = cfg.schema_size / 2;
    let mut attempts = 0;
    'seed: while graph.len() < seeded && attempts < ATTEMPTS_PER_ITEM * cfg.schema_size {
        let r = rules.choose(&mut g.rng).expect("at least one rule").clone();
        for t in &r.antecedent {
            attempts += 1;
            let t = g.rename_apart(t);
            add(t, &mut graph, &mut delta);
            if graph.len() >= seeded {
                break 'seed;
            }
        }
    }
    let mut attempts = 0;
    while graph.len() < cfg.schema_size && attempts < ATTEMPTS_PER_ITEM * cfg.schema_size {
        attempts += 1;
        let t = g.random_pattern();
        add(t, &mut graph, &mut delta);
    }

    let consequents: Vec<TriplePattern> = rules
        .iter()
        .flat_map(|r| r.consequent.iter().cloned())
        .collect();
    let antecedents: Vec<TriplePattern> = rules
        .iter()
        .flat_map(|r| r.antecedent.iter().cloned())
        .collect();
    let mut existentials: Vec<ExistentialRule> = Vec::new();
    let mut canonical: BTreeSet<ExistentialRule> = BTreeSet::new();
    let mut attempts = 0;
    while existentials.len() < cfg.existential_count
        && attempts < ATTEMPTS_PER_ITEM * cfg.existential_count
    {
        attempts += 1;
        let e = g.existential(&consequents, &antecedents);
        if canonical.contains(&e.canonical()) {
            continue;
        }
        existentials.push(e.clone());
        if weakly_acyclic(&existentials) {
            canonical.insert(e.canonical());
        } else {
            existentials.pop();
        }
    }

    let schema = TriplestoreSchema::new(graph, delta, existentials)?;
    Ok(Generated { schema, rules })
}
