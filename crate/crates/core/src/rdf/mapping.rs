use std::collections::btree_map;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::graph::GraphPattern;
use super::term::{Term, TriplePattern};

/// A partial function from variables to terms. Targets may be variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    bindings: BTreeMap<Arc<str>, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn bind(&mut self, var: impl Into<Arc<str>>, value: Term) -> Option<Term> {
        self.bindings.insert(var.into(), value)
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, Arc<str>, Term> {
        self.bindings.iter()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Variable(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        }
    }

    pub fn apply_triple(&self, t: &TriplePattern) -> TriplePattern {
        t.map_terms(|_, term| self.apply_term(term))
    }

    pub fn apply(&self, p: &GraphPattern) -> GraphPattern {
        p.iter().map(|t| self.apply_triple(t)).collect()
    }
}

impl FromIterator<(Arc<str>, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Arc<str>, Term)>>(iter: I) -> Self {
        Substitution {
            bindings: iter.into_iter().collect(),
        }
    }
}

/// Replace bound variables in `pattern`; unbound variables stay as they are.
pub fn apply_substitution(subst: &Substitution, pattern: &GraphPattern) -> GraphPattern {
    subst.apply(pattern)
}

/// A substitution whose targets are constants (IRIs or literals). Iteration
/// is ordered by variable name.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mapping {
    bindings: BTreeMap<Arc<str>, Term>,
}

impl Mapping {
    pub fn new() -> Self {
        Mapping::default()
    }

    /// Panics if `value` is a variable.
    pub fn bind(&mut self, var: impl Into<Arc<str>>, value: Term) -> Option<Term> {
        assert!(value.is_constant(), "mappings bind variables to constants");
        self.bindings.insert(var.into(), value)
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.bindings.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, Arc<str>, Term> {
        self.bindings.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Arc<str>> {
        self.bindings.keys()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Variable(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        }
    }

    pub fn apply_triple(&self, t: &TriplePattern) -> TriplePattern {
        t.map_terms(|_, term| self.apply_term(term))
    }

    pub fn apply(&self, p: &GraphPattern) -> GraphPattern {
        p.iter().map(|t| self.apply_triple(t)).collect()
    }

    pub fn to_substitution(&self) -> Substitution {
        self.bindings
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    /// Keep only the bindings whose value satisfies `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&Term) -> bool) -> Mapping {
        Mapping {
            bindings: self
                .bindings
                .iter()
                .filter(|(_, v)| keep(v))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

impl FromIterator<(Arc<str>, Term)> for Mapping {
    fn from_iter<I: IntoIterator<Item = (Arc<str>, Term)>>(iter: I) -> Self {
        let mut m = Mapping::new();
        for (k, v) in iter {
            m.bind(k, v);
        }
        m
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "?{k} -> {v}")?;
        }
        f.write_str("}")
    }
}
