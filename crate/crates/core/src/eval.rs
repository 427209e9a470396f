//! Conjunctive-query and union-of-conjunctive-query evaluation over
//! in-memory graphs.
//!
//! Evaluation is a left-deep nested-loop join; every step looks candidate
//! triples up in a per-position hash index using whichever positions are
//! already fixed.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::budget::Deadline;
use crate::error::Result;
use crate::rdf::{Graph, GraphPattern, Mapping, Position, Term, Triple, TriplePattern};

/// Hash index over the triples of a graph.
pub struct GraphIndex<'g> {
    triples: Vec<&'g Triple>,
    by_s: HashMap<&'g Term, Vec<u32>>,
    by_p: HashMap<&'g Term, Vec<u32>>,
    by_o: HashMap<&'g Term, Vec<u32>>,
}

impl<'g> GraphIndex<'g> {
    pub fn new(g: &'g Graph) -> Self {
        GraphIndex::from_triples(g.iter())
    }

    pub fn from_triples(it: impl IntoIterator<Item = &'g Triple>) -> Self {
        let mut idx = GraphIndex {
            triples: Vec::new(),
            by_s: HashMap::new(),
            by_p: HashMap::new(),
            by_o: HashMap::new(),
        };
        for t in it {
            let i = idx.triples.len() as u32;
            idx.triples.push(t);
            idx.by_s.entry(t.s()).or_default().push(i);
            idx.by_p.entry(t.p()).or_default().push(i);
            idx.by_o.entry(t.o()).or_default().push(i);
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    fn with_fixed(
        &self,
        fixed: [Option<&Term>; 3],
        f: &mut dyn FnMut(&'g Triple) -> Result<()>,
    ) -> Result<()> {
        let mut best: Option<&[u32]> = None;
        for (pos, key) in Position::ALL.into_iter().zip(fixed) {
            let Some(key) = key else { continue };
            let map = match pos {
                Position::Subject => &self.by_s,
                Position::Predicate => &self.by_p,
                Position::Object => &self.by_o,
            };
            let list = map.get(key).map(Vec::as_slice).unwrap_or(&[]);
            if best.is_none_or(|b| list.len() < b.len()) {
                best = Some(list);
            }
        }
        match best {
            Some(list) => {
                for &i in list {
                    f(self.triples[i as usize])?;
                }
            }
            None => {
                for t in &self.triples {
                    f(t)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Slot {
    Const(Term),
    Var(usize),
}

#[derive(Debug, Clone)]
struct Compiled {
    slots: [Slot; 3],
}

/// Receives each complete binding row with the variable names.
type Sink<'a> = dyn FnMut(&[Option<Term>], &[Arc<str>]) -> Result<()> + 'a;

/// One conjunct of a join: a disjunction of alternative patterns evaluated
/// against one index.
pub(crate) struct JoinEntry<'a, 'g> {
    pub alternatives: &'a [TriplePattern],
    pub index: &'a GraphIndex<'g>,
}

struct Join<'a, 'g> {
    entries: Vec<(Vec<Compiled>, &'a GraphIndex<'g>)>,
    names: Vec<Arc<str>>,
    deadline: &'a Deadline,
}

impl<'a, 'g> Join<'a, 'g> {
    fn new(entries: &[JoinEntry<'a, 'g>], deadline: &'a Deadline, reorder: bool) -> Self {
        let mut names: Vec<Arc<str>> = Vec::new();
        let mut ids: HashMap<Arc<str>, usize> = HashMap::new();
        let mut compile_term = |t: &Term| match t {
            Term::Variable(v) => {
                let id = *ids.entry(v.clone()).or_insert_with(|| {
                    names.push(v.clone());
                    names.len() - 1
                });
                Slot::Var(id)
            }
            c => Slot::Const(c.clone()),
        };
        let mut compiled: Vec<(Vec<Compiled>, &GraphIndex)> = entries
            .iter()
            .map(|e| {
                let alts = e
                    .alternatives
                    .iter()
                    .map(|t| Compiled {
                        slots: [compile_term(&t.s), compile_term(&t.p), compile_term(&t.o)],
                    })
                    .collect();
                (alts, e.index)
            })
            .collect();
        if reorder {
            compiled = greedy_order(compiled);
        }
        Join {
            entries: compiled,
            names,
            deadline,
        }
    }

    fn run(&self, sink: &mut Sink<'_>) -> Result<()> {
        let mut bindings: Vec<Option<Term>> = vec![None; self.names.len()];
        self.step(0, &mut bindings, sink)
    }

    fn step(&self, i: usize, bindings: &mut Vec<Option<Term>>, sink: &mut Sink<'_>) -> Result<()> {
        if i == self.entries.len() {
            return sink(bindings, &self.names);
        }
        let (alts, index) = &self.entries[i];
        for alt in alts {
            let fixed: Vec<Option<Term>> = alt
                .slots
                .iter()
                .map(|s| match s {
                    Slot::Const(c) => Some(c.clone()),
                    Slot::Var(v) => bindings[*v].clone(),
                })
                .collect();
            let fixed_refs = [fixed[0].as_ref(), fixed[1].as_ref(), fixed[2].as_ref()];
            index.with_fixed(fixed_refs, &mut |t: &Triple| {
                self.deadline.tick()?;
                let mut newly: [Option<usize>; 3] = [None; 3];
                let mut ok = true;
                for (k, (slot, value)) in alt.slots.iter().zip(t.terms()).enumerate() {
                    match slot {
                        Slot::Const(c) => {
                            if c != value {
                                ok = false;
                                break;
                            }
                        }
                        Slot::Var(v) => match &bindings[*v] {
                            Some(b) => {
                                if b != value {
                                    ok = false;
                                    break;
                                }
                            }
                            None => {
                                bindings[*v] = Some(value.clone());
                                newly[k] = Some(*v);
                            }
                        },
                    }
                }
                if ok {
                    self.step(i + 1, bindings, sink)?;
                }
                for v in newly.into_iter().flatten() {
                    bindings[v] = None;
                }
                Ok(())
            })?;
        }
        Ok(())
    }
}

/// Greedy join order: start from the most constrained entry, then keep
/// picking the entry with the most positions already fixed.
fn greedy_order<'a, 'g>(
    mut entries: Vec<(Vec<Compiled>, &'a GraphIndex<'g>)>,
) -> Vec<(Vec<Compiled>, &'a GraphIndex<'g>)> {
    let mut bound: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::with_capacity(entries.len());
    while !entries.is_empty() {
        let score = |e: &(Vec<Compiled>, &GraphIndex)| -> usize {
            let Some(rep) = e.0.first() else { return 0 };
            rep.slots
                .iter()
                .map(|s| match s {
                    Slot::Const(_) => 2,
                    Slot::Var(v) if bound.contains(v) => 3,
                    Slot::Var(_) => 0,
                })
                .sum()
        };
        let best = (0..entries.len())
            .max_by_key(|&i| (score(&entries[i]), std::cmp::Reverse(i)))
            .expect("non-empty");
        let e = entries.remove(best);
        for alt in &e.0 {
            for s in &alt.slots {
                if let Slot::Var(v) = s {
                    bound.insert(*v);
                }
            }
        }
        out.push(e);
    }
    out
}

fn to_mapping(bindings: &[Option<Term>], names: &[Arc<str>]) -> Mapping {
    names
        .iter()
        .zip(bindings)
        .filter_map(|(n, b)| b.as_ref().map(|b| (n.clone(), b.clone())))
        .collect()
}

/// Runs a join and collects every mapping that binds all of `required`.
pub(crate) fn join(
    entries: &[JoinEntry<'_, '_>],
    required: &BTreeSet<Arc<str>>,
    deadline: &Deadline,
    reorder: bool,
) -> Result<BTreeSet<Mapping>> {
    let plan = Join::new(entries, deadline, reorder);
    let mut out = BTreeSet::new();
    plan.run(&mut |bindings, names| {
        let m = to_mapping(bindings, names);
        if required.iter().all(|v| m.contains(v)) {
            out.insert(m);
        }
        Ok(())
    })?;
    Ok(out)
}

/// `⟦P⟧_I`: every mapping `m` with `dom(m) = vars(P)` and `m(P) ⊆ I`.
pub fn evaluate_bgp(p: &GraphPattern, g: &Graph) -> BTreeSet<Mapping> {
    evaluate_bgp_indexed(p, &GraphIndex::new(g), &Deadline::none()).expect("no deadline set")
}

pub fn evaluate_bgp_indexed(
    p: &GraphPattern,
    index: &GraphIndex<'_>,
    deadline: &Deadline,
) -> Result<BTreeSet<Mapping>> {
    let pats: Vec<TriplePattern> = p.iter().cloned().collect();
    let entries: Vec<JoinEntry> = pats
        .iter()
        .map(|t| JoinEntry {
            alternatives: std::slice::from_ref(t),
            index,
        })
        .collect();
    join(&entries, &p.vars(), deadline, true)
}

/// A conjunction of disjunctions of triple patterns: one entry per triple
/// of the source pattern, each listing its alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnionQuery {
    pub source: GraphPattern,
    pub disjunct_lists: Vec<Vec<TriplePattern>>,
}

impl UnionQuery {
    /// The query whose only disjunct is `source` itself.
    pub fn identity(source: &GraphPattern) -> Self {
        UnionQuery {
            source: source.clone(),
            disjunct_lists: source.iter().map(|t| vec![t.clone()]).collect(),
        }
    }
}

/// `Q(A)`: each triple of `a` becomes the union of the variants obtained by
/// replacing any subset of its positions with `lambda`. With
/// `prune_predicate_lambda`, variants with `lambda` as predicate are left out
/// (valid when no schema predicate is a variable).
pub fn build_lambda_rewriting(
    a: &GraphPattern,
    lambda: &Term,
    prune_predicate_lambda: bool,
) -> UnionQuery {
    let disjunct_lists = a
        .iter()
        .map(|t| {
            let mut alts: Vec<TriplePattern> = Vec::with_capacity(8);
            // bit i set = position i replaced; 0 first so the identity is
            // always the first alternative
            for mask in 0u8..8 {
                if prune_predicate_lambda && mask & 0b010 != 0 {
                    continue;
                }
                let alt = t.map_terms(|pos, term| {
                    let bit = match pos {
                        Position::Subject => 0b001,
                        Position::Predicate => 0b010,
                        Position::Object => 0b100,
                    };
                    if mask & bit != 0 {
                        lambda.clone()
                    } else {
                        term.clone()
                    }
                });
                if !alts.contains(&alt) {
                    alts.push(alt);
                }
            }
            alts
        })
        .collect();
    UnionQuery {
        source: a.clone(),
        disjunct_lists,
    }
}

/// Union over all conjunct choices, keeping only mappings that bind every
/// variable of the source pattern.
pub fn evaluate_union_query(q: &UnionQuery, g: &Graph) -> BTreeSet<Mapping> {
    evaluate_union_query_indexed(q, &GraphIndex::new(g), &Deadline::none())
        .expect("no deadline set")
}

pub fn evaluate_union_query_indexed(
    q: &UnionQuery,
    index: &GraphIndex<'_>,
    deadline: &Deadline,
) -> Result<BTreeSet<Mapping>> {
    let entries: Vec<JoinEntry> = q
        .disjunct_lists
        .iter()
        .map(|alts| JoinEntry {
            alternatives: alts,
            index,
        })
        .collect();
    join(&entries, &q.source.vars(), deadline, true)
}
